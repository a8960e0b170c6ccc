#include "stripefs/iod/daemon.hpp"

#include <algorithm>
#include <utility>

#include "stripefs/common/error.hpp"

namespace stripefs::iod {

Daemon::Pin::Pin(Pin&& other) noexcept : daemon_(std::exchange(other.daemon_, nullptr)), handle_(other.handle_) {}

Daemon::Pin::~Pin() {
  if (daemon_ == nullptr) return;
  std::lock_guard lock(daemon_->mu_);
  auto it = daemon_->pins_.find(handle_);
  if (it != daemon_->pins_.end() && it->second > 0) --it->second;
}

Daemon::Daemon(DaemonConfig config, std::unique_ptr<BackingStore> store, std::shared_ptr<Pacer> pacer)
    : config_(config), store_(std::move(store)), pacer_(std::move(pacer)), cache_(config.cache, store_.get()) {
  config_.throttle.validate();
  config_.cache.validate();
  for (auto handle : store_->handles()) {
    cache_.adopt(handle, store_->size(handle));
    pins_.emplace(handle, 0);
  }
}

void Daemon::require(std::uint64_t handle) const {
  if (!pins_.contains(handle)) raise(Errc::no_such_file, "handle " + std::to_string(handle));
}

void Daemon::pace(const CacheCost& cost) {
  if (config_.throttle.enabled && pacer_) pacer_->charge(config_.throttle.seconds(cost));
}

void Daemon::create(std::uint64_t handle) {
  std::lock_guard lock(mu_);
  if (pins_.contains(handle)) raise(Errc::exists, "handle " + std::to_string(handle));
  store_->create(handle);
  pins_.emplace(handle, 0);
}

bool Daemon::exists(std::uint64_t handle) const {
  std::lock_guard lock(mu_);
  return pins_.contains(handle);
}

void Daemon::remove(std::uint64_t handle) {
  std::lock_guard lock(mu_);
  require(handle);
  if (pins_.at(handle) > 0) raise(Errc::busy, "handle " + std::to_string(handle) + " is in use");
  cache_.drop(handle);
  store_->remove(handle);
  pins_.erase(handle);
}

Daemon::Pin Daemon::pin(std::uint64_t handle) {
  std::lock_guard lock(mu_);
  require(handle);
  ++pins_[handle];
  return Pin(this, handle);
}

SubFileStat Daemon::stat(std::uint64_t handle) const {
  std::lock_guard lock(mu_);
  require(handle);
  SubFileStat st;
  st.size = cache_.size(handle);
  st.resident_bytes = cache_.resident_bytes(handle);
  st.dirty_bytes = cache_.dirty_bytes(handle);
  st.cache_hit_bytes = hit_bytes_;
  st.disk_read_bytes = disk_read_bytes_;
  return st;
}

WriteResult Daemon::write_locked(std::uint64_t handle, std::uint64_t offset, ByteView data) {
  require(handle);
  WriteResult result;
  result.cost = cache_.write(handle, offset, data);
  result.accepted = data.size();
  return result;
}

ReadResult Daemon::read_locked(std::uint64_t handle, std::uint64_t offset, std::uint64_t length) {
  require(handle);
  ReadResult result;
  result.data.resize(length);
  result.cost = cache_.read(handle, offset, result.data, &result.served_from);
  hit_bytes_ += result.cost.cache_read;
  disk_read_bytes_ += result.cost.disk_read();
  return result;
}

WriteResult Daemon::handle_write(std::uint64_t handle, std::uint64_t offset, ByteView data) {
  WriteResult result;
  {
    std::lock_guard lock(mu_);
    result = write_locked(handle, offset, data);
  }
  pace(result.cost);
  return result;
}

ReadResult Daemon::handle_read(std::uint64_t handle, std::uint64_t offset, std::uint64_t length) {
  ReadResult result;
  {
    std::lock_guard lock(mu_);
    result = read_locked(handle, offset, length);
  }
  pace(result.cost);
  return result;
}

FlushReport Daemon::flush_dirty(std::optional<std::uint64_t> handle) {
  CacheCost cost;
  FlushReport report;
  {
    std::lock_guard lock(mu_);
    if (handle) require(*handle);
    report = cache_.flush(handle, &cost);
  }
  pace(cost);
  return report;
}

GatherResult Daemon::disk_directed_serve(std::uint64_t handle, std::span<const GatherRequest> requests,
                                         Direction dir) {
  std::vector<layout::SubExtent> pieces;
  pieces.reserve(requests.size());
  for (const auto& r : requests) {
    if (dir == Direction::write && r.data.size() != r.length) {
      raise(Errc::protocol, "gather write request length does not match its data");
    }
    pieces.push_back({0, r.offset, r.length});
  }
  auto coalesced = layout::coalesce(pieces);

  GatherResult result;
  result.plan = coalesced.extents;
  std::lock_guard lock(mu_);
  require(handle);

  if (dir == Direction::read) {
    result.data.resize(requests.size());
    for (const auto& run : coalesced.extents) {
      auto got = read_locked(handle, run.offset, run.length);
      result.cost += got.cost;
      for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& r = requests[i];
        if (r.length == 0 || r.offset < run.offset || r.offset + r.length > run.end()) continue;
        auto first = got.data.begin() + static_cast<std::ptrdiff_t>(r.offset - run.offset);
        result.data[i].assign(first, first + static_cast<std::ptrdiff_t>(r.length));
      }
    }
  } else {
    result.overlap = !coalesced.overlaps.empty();
    result.accepted.assign(requests.size(), 0);
    for (const auto& run : coalesced.extents) {
      Bytes buffer(run.length);
      for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& r = requests[i];
        if (r.length == 0 || r.offset < run.offset || r.offset + r.length > run.end()) continue;
        std::copy(r.data.begin(), r.data.end(), buffer.begin() + static_cast<std::ptrdiff_t>(r.offset - run.offset));
        result.accepted[i] = r.length;
      }
      result.cost += write_locked(handle, run.offset, buffer).cost;
    }
  }
  if (config_.throttle.enabled && pacer_) pacer_->charge(config_.throttle.seconds(result.cost));
  return result;
}

std::uint64_t Daemon::dirty_bytes() const {
  std::lock_guard lock(mu_);
  return cache_.dirty_bytes();
}

std::uint64_t Daemon::resident_bytes() const {
  std::lock_guard lock(mu_);
  return cache_.resident_bytes();
}

std::pair<std::uint64_t, std::uint64_t> Daemon::read_counters() const {
  std::lock_guard lock(mu_);
  return {hit_bytes_, disk_read_bytes_};
}

}  // namespace stripefs::iod
