#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "stripefs/transport/transport.hpp"

namespace stripefs::transport {

struct SocketNode {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0: pick an ephemeral port at registration
};

/// Stream-socket backend. Node i listens on nodes[i]; each (src, dst) pair
/// gets one outbound connection, which gives per-pair ordering for free.
/// Frames use the PSTF layout from framing.hpp.
class SocketTransport final : public Transport {
 public:
  explicit SocketTransport(std::vector<SocketNode> nodes, std::size_t mtu = kDefaultMtu);
  ~SocketTransport() override;

  SocketTransport(const SocketTransport&) = delete;
  SocketTransport& operator=(const SocketTransport&) = delete;

  Receipt send(NodeId src, NodeId dst, ByteView payload) override;
  Registration register_receiver(NodeId id, Delivery deliver) override;
  std::size_t mtu() const noexcept override { return mtu_; }

  /// The node table, with ports filled in for locally registered ids.
  SocketNode node(NodeId id) const;

 protected:
  void deregister(NodeId id) noexcept override;

 private:
  struct Connection {
    std::mutex mu;
    int fd = -1;
    std::uint64_t seq = 0;
  };
  struct Reader {
    int fd = -1;
    std::thread thread;
  };
  struct Listener {
    NodeId id;
    int fd = -1;
    Delivery deliver;
    std::mutex delivery_mu;
    std::atomic<bool> stopping{false};
    std::thread acceptor;
    std::mutex readers_mu;
    std::list<Reader> readers;
  };

  void accept_loop(Listener& listener);
  void read_loop(Listener& listener, int fd);
  std::shared_ptr<Connection> connection(NodeId src, NodeId dst);
  bool peer_closed(Connection& conn);
  void drop_connection(NodeId src, NodeId dst, const std::shared_ptr<Connection>& conn);
  double now() const;

  std::size_t mtu_;
  std::chrono::steady_clock::time_point epoch_ = std::chrono::steady_clock::now();

  mutable std::mutex mu_;
  std::vector<SocketNode> nodes_;
  std::unordered_map<NodeId, std::unique_ptr<Listener>> listeners_;
  std::map<std::pair<NodeId, NodeId>, std::shared_ptr<Connection>> outbound_;
};

}  // namespace stripefs::transport
