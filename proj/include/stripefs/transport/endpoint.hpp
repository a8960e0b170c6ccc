#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "stripefs/transport/message.hpp"
#include "stripefs/transport/transport.hpp"

namespace stripefs::transport {

struct Incoming {
  NodeId src;
  Request request;
};

/// Request/response messaging for one node on top of a Transport.
///
/// A message from a peer is parsed as a response when this endpoint has an
/// unanswered request outstanding to that peer, and as a request otherwise.
/// Since a pair's datagrams arrive in order this classification is exact as
/// long as a pair of nodes never issues requests to each other in both
/// directions at once. Peer-to-peer traffic uses post(), which expects no
/// response.
class Endpoint {
 public:
  using Clock = std::chrono::steady_clock;
  static constexpr std::chrono::milliseconds kDefaultTimeout{30000};

  Endpoint(Transport& transport, NodeId self);
  ~Endpoint();

  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;

  NodeId id() const noexcept { return self_; }
  Transport& transport() noexcept { return transport_; }

  void send_request(NodeId dst, const Request& request);
  void post(NodeId dst, const Request& request);
  void send_response(NodeId dst, const Response& response);

  /// Next response from src, in the order the requests were sent.
  Response await_response(NodeId src, std::chrono::milliseconds timeout = kDefaultTimeout);

  std::optional<Incoming> next_request(std::chrono::milliseconds timeout);
  std::optional<Incoming> next_request_matching(const std::function<bool(const Incoming&)>& match,
                                                std::chrono::milliseconds timeout);

  /// Stops delivery and wakes every waiter.
  void close();

 private:
  struct Reassembly {
    Bytes buffer;
    bool response = false;
  };

  void on_datagram(const Datagram& datagram);
  void send_message(NodeId dst, const Bytes& message);

  Transport& transport_;
  NodeId self_;
  std::mutex send_mu_;

  std::mutex mu_;
  std::condition_variable cv_;
  bool closed_ = false;
  std::unordered_map<NodeId, Reassembly> partial_;
  std::unordered_map<NodeId, std::uint64_t> pending_;
  std::unordered_map<NodeId, std::deque<Response>> responses_;
  std::deque<Incoming> requests_;

  Registration registration_;
};

}  // namespace stripefs::transport
