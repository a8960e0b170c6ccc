#pragma once

#include <cstdint>
#include <span>

namespace stripefs::bench {

/// Mean after dropping one smallest and one largest sample. Needs at least
/// three samples (Errc::arity otherwise).
double trim_mean(std::span<const double> samples);

/// Total bytes over the slowest process's time.
double aggregate_bandwidth(std::uint32_t procs, std::uint64_t bytes_per_proc, double max_seconds);

}  // namespace stripefs::bench
