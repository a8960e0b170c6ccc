#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <utility>

#include "stripefs/transport/transport.hpp"

namespace stripefs::transport {

/// Link model for the simulator. Defaults are the measured software+hardware
/// message latency and the saturated point-to-point TCP rate.
struct SimParams {
  double latency_us = 17.1;
  double bandwidth_bps = 93e6;

  void validate() const;
  double wire_seconds(std::size_t bytes) const { return static_cast<double>(bytes) / bandwidth_bps; }
  double latency_seconds() const { return latency_us * 1e-6; }
};

/// In-process backend. Delivery happens synchronously in the sender's thread,
/// serialized per destination. Every message advances a deterministic virtual
/// clock: a B-byte datagram holds the sender's transmit side and the
/// receiver's receive side for B/bandwidth and arrives one latency later.
class SimTransport final : public Transport {
 public:
  explicit SimTransport(SimParams params = {}, std::size_t mtu = kDefaultMtu);
  ~SimTransport() override;

  Receipt send(NodeId src, NodeId dst, ByteView payload) override;
  Registration register_receiver(NodeId id, Delivery deliver) override;
  std::size_t mtu() const noexcept override { return mtu_; }

  const SimParams& params() const noexcept { return params_; }

  /// Virtual time at which node's transmit side is next free.
  double clock(NodeId id) const;

 protected:
  void deregister(NodeId id) noexcept override;

 private:
  struct Slot {
    std::mutex mu;
    Delivery deliver;
    bool active = true;
  };

  SimParams params_;
  std::size_t mtu_;

  mutable std::shared_mutex registry_mu_;
  std::unordered_map<NodeId, std::shared_ptr<Slot>> slots_;

  mutable std::mutex clock_mu_;
  std::unordered_map<NodeId, double> tx_free_;
  std::unordered_map<NodeId, double> rx_free_;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> seq_;
};

}  // namespace stripefs::transport
