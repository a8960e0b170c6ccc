#pragma once

#include <chrono>
#include <mutex>

#include "stripefs/iod/page_cache.hpp"

namespace stripefs::iod {

/// Rates for turning CacheCost into time. Defaults are the measured rates of
/// the reference nodes: asymptotic disk write, uncached disk read, and cached
/// read. Cache writes are memory copies and share the cached-read rate.
struct ThrottleModel {
  bool enabled = false;
  double disk_write_bps = 19e6;
  double disk_read_bps = 24e6;
  double cache_read_bps = 280e6;
  double cache_write_bps = 280e6;
  /// Multiplier on disk_read_bps for reads that need a seek. 1.0 disables it.
  double concurrent_read_penalty = 1.0;

  void validate() const;
  double seconds(const CacheCost& cost) const;
};

/// Consumes the time a daemon operation is charged.
class Pacer {
 public:
  virtual ~Pacer() = default;
  virtual void charge(double seconds) = 0;
};

/// Accumulates charged time on a virtual clock.
class VirtualPacer final : public Pacer {
 public:
  void charge(double seconds) override;
  double now() const;

 private:
  mutable std::mutex mu_;
  double now_ = 0.0;
};

/// Serial resource on wall time: each charge occupies the resource after the
/// previous one and the caller sleeps until its slot ends.
class WallPacer final : public Pacer {
 public:
  void charge(double seconds) override;

 private:
  std::mutex mu_;
  std::chrono::steady_clock::time_point free_at_{};
};

}  // namespace stripefs::iod
