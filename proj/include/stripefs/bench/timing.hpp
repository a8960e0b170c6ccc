#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "stripefs/iod/page_cache.hpp"
#include "stripefs/iod/throttle.hpp"
#include "stripefs/layout/distribution.hpp"
#include "stripefs/transport/sim_transport.hpp"

namespace stripefs::bench {

struct TimingParams {
  transport::SimParams net;
  iod::CacheConfig cache;
  iod::ThrottleModel throttle;
  std::uint64_t request_size = 64 * 1024;
  /// Requests a rank keeps outstanding per daemon.
  std::uint32_t window = 16;
};

/// One rank's contiguous access to one file.
struct Access {
  std::uint64_t handle = 0;
  layout::Distribution dist;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
};

struct PhaseTiming {
  std::vector<double> elapsed;  // per rank, from the phase start
  iod::CacheCost cost;          // summed over daemons
  double max_elapsed() const;
};

/// Virtual-clock model of ranks streaming page-size requests to daemons.
///
/// Events are processed in time order. Every node has a transmit and a
/// receive link, each serving one message at a time in arrival order; a
/// message takes size / bandwidth on a link and arrives one latency after
/// leaving the receiver's link. A rank cycles over the daemons it addresses,
/// keeping up to `window` requests in flight to each. A daemon serves its
/// requests one at a time; the service time comes from a data-less page
/// cache priced by the throttle model. Ties between simultaneous events are
/// broken by a rank order drawn from the seed.
class TimingModel {
 public:
  TimingModel(TimingParams params, std::uint32_t n_iods, std::uint32_t n_ranks, std::uint64_t seed);

  /// Runs one phase in which rank r performs accesses[r] (empty: idle).
  PhaseTiming run_phase(const std::vector<std::vector<Access>>& accesses, bool write);

  /// Advances every clock to the latest one.
  void barrier();

  double now() const;
  const iod::PageCache& cache(std::uint32_t iod) const { return *caches_.at(iod); }
  const TimingParams& params() const noexcept { return params_; }

 private:
  struct Link {
    double tx_free = 0.0;
    double rx_free = 0.0;
  };

  TimingParams params_;
  std::uint32_t n_iods_;
  std::uint32_t n_ranks_;
  std::uint64_t seed_;
  std::uint64_t phase_ = 0;
  std::vector<Link> rank_links_;
  std::vector<Link> iod_links_;
  std::vector<double> iod_busy_;
  std::vector<std::unique_ptr<iod::PageCache>> caches_;
  double epoch_ = 0.0;
};

}  // namespace stripefs::bench
