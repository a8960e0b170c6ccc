#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "stripefs/common/bytes.hpp"
#include "stripefs/transport/address.hpp"

namespace stripefs::transport {

inline constexpr std::size_t kDefaultMtu = 64 * 1024;

struct Datagram {
  NodeId src;
  NodeId dst;
  Bytes payload;
};

/// Returned by a successful send. Times are seconds on the backend's clock:
/// virtual for the simulator, wall time for sockets.
struct Receipt {
  std::uint64_t seq = 0;  // per (src, dst) pair, starting at 1
  double sent_at = 0.0;
  double delivered_at = 0.0;

  double elapsed() const { return delivered_at - sent_at; }
};

class Transport;

/// Owns a receiver registration; destroying it stops delivery.
class Registration {
 public:
  Registration() = default;
  Registration(Registration&& other) noexcept;
  Registration& operator=(Registration&& other) noexcept;
  Registration(const Registration&) = delete;
  Registration& operator=(const Registration&) = delete;
  ~Registration();

  void reset() noexcept;
  bool active() const noexcept { return owner_ != nullptr; }
  NodeId id() const noexcept { return id_; }

 private:
  friend class Transport;
  Registration(Transport* owner, NodeId id) : owner_(owner), id_(id) {}

  Transport* owner_ = nullptr;
  NodeId id_;
};

/// Reliable datagram service between numbered nodes. Per (src, dst) pair,
/// datagrams arrive exactly once and in send order. There is no broadcast.
/// Payloads above mtu() are rejected; splitting is the caller's job.
class Transport {
 public:
  using Delivery = std::function<void(const Datagram&)>;

  virtual ~Transport() = default;

  virtual Receipt send(NodeId src, NodeId dst, ByteView payload) = 0;

  /// Deliveries for one id are serialized; distinct ids may run concurrently.
  /// The callback must not deregister its own id.
  [[nodiscard]] virtual Registration register_receiver(NodeId id, Delivery deliver) = 0;

  virtual std::size_t mtu() const noexcept = 0;

 protected:
  friend class Registration;
  virtual void deregister(NodeId id) noexcept = 0;
  Registration make_registration(NodeId id) { return Registration(this, id); }
};

}  // namespace stripefs::transport
