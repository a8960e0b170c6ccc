#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stripefs/iod/daemon.hpp"
#include "stripefs/transport/sim_transport.hpp"

namespace stripefs::bench {

enum class ReadMode { warm, cold };
enum class Profile { sim, real };
/// How real-profile ranks run: threads of this process, or worker
/// processes started from worker_exe.
enum class Launch { threads, processes };

const char* to_string(ReadMode mode) noexcept;
const char* to_string(Profile profile) noexcept;

struct ProfileParams {
  transport::SimParams net;
  iod::DaemonConfig daemon;
  /// Default S/N, bytes per daemon per process.
  std::uint64_t per_iod_bytes = 0;
};

/// sim: the reference cluster (256 MiB cache, 40 % threshold, S/N = 2 MiB).
/// real: desk scale over loopback sockets (64 MiB cache, S/N = 512 KiB),
/// with daemon time paced on the wall clock.
ProfileParams profile_params(Profile profile);

struct BenchConfig {
  std::uint32_t procs = 4;
  std::uint32_t iods = 4;
  /// 0: iods times the profile's S/N.
  std::uint64_t per_proc_bytes = 0;
  std::uint64_t stripe = 64 * 1024;
  std::uint32_t repeats = 5;
  ReadMode mode = ReadMode::warm;
  Profile profile = Profile::sim;
  std::uint64_t seed = 1;
  /// Total bytes moved by the real-data integrity pass of a sim run.
  std::uint64_t verify_budget = 32ull << 20;
  Launch launch = Launch::threads;
  std::string worker_exe;
  /// Overrides the profile's daemon settings.
  std::optional<iod::DaemonConfig> daemon;

  std::uint64_t bytes_per_proc() const;
  iod::DaemonConfig daemon_config() const;
  /// Raises Errc::config when the invariants do not hold.
  void validate() const;
};

struct RunResult {
  std::vector<double> write_seconds;  // per rank
  std::vector<double> read_seconds;
  double write_bps = 0.0;
  double read_bps = 0.0;
  double served_from_cache_pct = 0.0;
};

struct BenchResult {
  BenchConfig config;
  std::vector<RunResult> runs;
  double write_bps = 0.0;  // trimmed mean over runs
  double read_bps = 0.0;
  double served_from_cache_pct = 0.0;  // mean over runs
  bool verified = false;
};

/// Create, P disjoint writes at rank * S, barrier, close, reopen, P reads of
/// the same ranges, digest check. Cold mode runs run_cold_read instead.
BenchResult run_concurrent_rw(const BenchConfig& config);

/// As run_concurrent_rw, but at least three cache capacities of other files
/// are written per daemon between the write and read phases.
BenchResult run_cold_read(const BenchConfig& config);

/// Stripe size equal to S with P = N: each rank writes to exactly one
/// daemon. Raises Errc::validation if the layout says otherwise.
BenchResult run_large_stripe(BenchConfig config);

/// Number of filler files of P * S bytes a cold run writes.
std::uint32_t filler_files(const BenchConfig& config, std::uint64_t per_proc_bytes, std::uint64_t capacity);

}  // namespace stripefs::bench
