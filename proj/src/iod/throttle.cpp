#include "stripefs/iod/throttle.hpp"

#include <algorithm>
#include <thread>

#include "stripefs/common/error.hpp"

namespace stripefs::iod {

void ThrottleModel::validate() const {
  if (!enabled) return;
  if (!(disk_write_bps > 0 && disk_read_bps > 0 && cache_read_bps > 0 && cache_write_bps > 0)) {
    raise(Errc::config, "throttle rates must be > 0");
  }
  if (!(concurrent_read_penalty > 0 && concurrent_read_penalty <= 1.0)) {
    raise(Errc::config, "concurrent_read_penalty must be in (0, 1]");
  }
}

double ThrottleModel::seconds(const CacheCost& cost) const {
  auto t = [](std::uint64_t bytes, double rate) { return static_cast<double>(bytes) / rate; };
  return t(cost.cache_read, cache_read_bps) + t(cost.cache_written, cache_write_bps) +
         t(cost.disk_read_sequential, disk_read_bps) +
         t(cost.disk_read_seek, disk_read_bps * concurrent_read_penalty) + t(cost.disk_written, disk_write_bps);
}

void VirtualPacer::charge(double seconds) {
  std::lock_guard lock(mu_);
  now_ += seconds;
}

double VirtualPacer::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void WallPacer::charge(double seconds) {
  std::chrono::steady_clock::time_point until;
  {
    std::lock_guard lock(mu_);
    const auto start = std::max(std::chrono::steady_clock::now(), free_at_);
    free_at_ = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(seconds));
    until = free_at_;
  }
  std::this_thread::sleep_until(until);
}

}  // namespace stripefs::iod
