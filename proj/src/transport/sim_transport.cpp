#include "stripefs/transport/sim_transport.hpp"

#include <algorithm>

#include "stripefs/common/error.hpp"

namespace stripefs::transport {

void SimParams::validate() const {
  if (!(latency_us >= 0.0)) raise(Errc::config, "latency must be >= 0");
  if (!(bandwidth_bps > 0.0)) raise(Errc::config, "bandwidth must be > 0");
}

SimTransport::SimTransport(SimParams params, std::size_t mtu) : params_(params), mtu_(mtu) {
  params_.validate();
}

SimTransport::~SimTransport() = default;

Receipt SimTransport::send(NodeId src, NodeId dst, ByteView payload) {
  if (payload.size() > mtu_) {
    raise(Errc::fragmentation_required,
          std::to_string(payload.size()) + " bytes exceeds mtu " + std::to_string(mtu_));
  }
  std::shared_ptr<Slot> slot;
  {
    std::shared_lock lock(registry_mu_);
    auto it = slots_.find(dst);
    if (it != slots_.end()) slot = it->second;
  }
  if (!slot) raise(Errc::unreachable, to_string(dst) + " is not registered");

  std::lock_guard delivery(slot->mu);
  if (!slot->active) raise(Errc::unreachable, to_string(dst) + " is not registered");

  Receipt receipt;
  {
    std::lock_guard lock(clock_mu_);
    double& tx = tx_free_[src];
    double& rx = rx_free_[dst];
    receipt.sent_at = tx;
    const double start = std::max(tx, rx);
    const double done = start + params_.wire_seconds(payload.size());
    tx = rx = done;
    receipt.delivered_at = done + params_.latency_seconds();
    receipt.seq = ++seq_[{src, dst}];
  }
  slot->deliver(Datagram{src, dst, Bytes(payload.begin(), payload.end())});
  return receipt;
}

Registration SimTransport::register_receiver(NodeId id, Delivery deliver) {
  std::unique_lock lock(registry_mu_);
  if (slots_.contains(id)) raise(Errc::already_registered, to_string(id));
  auto slot = std::make_shared<Slot>();
  slot->deliver = std::move(deliver);
  slots_.emplace(id, std::move(slot));
  return make_registration(id);
}

void SimTransport::deregister(NodeId id) noexcept {
  std::shared_ptr<Slot> slot;
  {
    std::unique_lock lock(registry_mu_);
    auto it = slots_.find(id);
    if (it == slots_.end()) return;
    slot = std::move(it->second);
    slots_.erase(it);
  }
  // Waits out an in-flight delivery so none happens after we return.
  std::lock_guard delivery(slot->mu);
  slot->active = false;
}

double SimTransport::clock(NodeId id) const {
  std::lock_guard lock(clock_mu_);
  auto it = tx_free_.find(id);
  return it == tx_free_.end() ? 0.0 : it->second;
}

}  // namespace stripefs::transport
