#include "stripefs/bench/stats.hpp"

#include <algorithm>
#include <vector>

#include "stripefs/common/error.hpp"

namespace stripefs::bench {

double trim_mean(std::span<const double> samples) {
  if (samples.size() < 3) raise(Errc::arity, "trim_mean needs at least 3 samples");
  // Summing the kept samples directly avoids cancellation against a huge outlier.
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < sorted.size(); ++i) sum += sorted[i];
  return sum / static_cast<double>(sorted.size() - 2);
}

double aggregate_bandwidth(std::uint32_t procs, std::uint64_t bytes_per_proc, double max_seconds) {
  if (!(max_seconds > 0.0)) raise(Errc::validation, "elapsed time must be positive");
  return static_cast<double>(procs) * static_cast<double>(bytes_per_proc) / max_seconds;
}

}  // namespace stripefs::bench
