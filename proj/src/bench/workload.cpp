#include "stripefs/bench/workload.hpp"

#include <algorithm>
#include <set>

#include "stripefs/bench/runner.hpp"
#include "stripefs/bench/stats.hpp"
#include "stripefs/bench/timing.hpp"
#include "stripefs/common/error.hpp"
#include "stripefs/layout/mapping.hpp"

namespace stripefs::bench {

const char* to_string(ReadMode mode) noexcept { return mode == ReadMode::warm ? "warm" : "cold"; }

const char* to_string(Profile profile) noexcept { return profile == Profile::sim ? "sim" : "real"; }

ProfileParams profile_params(Profile profile) {
  ProfileParams p;
  p.daemon.throttle.enabled = true;
  // Concurrent cold reads ran at 13 MB/s per daemon against 24 MB/s for a
  // single stream; reads that need a seek are charged at that ratio.
  p.daemon.throttle.concurrent_read_penalty = 13.0 / 24.0;
  if (profile == Profile::sim) {
    p.daemon.cache.capacity = 256ull << 20;
    p.per_iod_bytes = 2ull << 20;
  } else {
    p.daemon.cache.capacity = 64ull << 20;
    p.per_iod_bytes = 512ull << 10;
  }
  p.daemon.cache.dirty_threshold = 0.40;
  return p;
}

std::uint64_t BenchConfig::bytes_per_proc() const {
  return per_proc_bytes != 0 ? per_proc_bytes : iods * profile_params(profile).per_iod_bytes;
}

iod::DaemonConfig BenchConfig::daemon_config() const { return daemon ? *daemon : profile_params(profile).daemon; }

void BenchConfig::validate() const {
  if (procs == 0 || iods == 0) raise(Errc::config, "procs and iods must be at least 1");
  if (repeats < 3) raise(Errc::config, "at least 3 repeats are needed for the trimmed mean");
  if (stripe == 0) raise(Errc::config, "stripe must be positive");
  const auto s = bytes_per_proc();
  const auto page = daemon_config().cache.page_size;
  if (s == 0) raise(Errc::config, "per-process bytes must be positive");
  if (s < stripe && s % page != 0) raise(Errc::config, "per-process bytes must reach the stripe or be a page multiple");
  if (launch == Launch::processes && worker_exe.empty()) raise(Errc::config, "process launch needs a worker executable");
  daemon_config().cache.validate();
}

std::uint32_t filler_files(const BenchConfig& config, std::uint64_t per_proc_bytes, std::uint64_t capacity) {
  // Each filler puts P * S / N bytes on every daemon; three capacities' worth.
  const auto per_file = static_cast<std::uint64_t>(config.procs) * per_proc_bytes / config.iods;
  const auto need = 3 * capacity;
  return static_cast<std::uint32_t>((need + per_file - 1) / std::max<std::uint64_t>(per_file, 1));
}

namespace {

RunResult simulate(const BenchConfig& c, std::uint32_t repeat) {
  const auto daemon = c.daemon_config();
  const auto s = c.bytes_per_proc();
  TimingParams tp;
  tp.net = profile_params(c.profile).net;
  tp.cache = daemon.cache;
  tp.throttle = daemon.throttle;
  tp.request_size = daemon.cache.page_size;
  TimingModel model(tp, c.iods, c.procs, c.seed + repeat);

  const layout::Distribution dist = layout::StripeSpec{c.stripe, c.iods, 0};
  auto phase = [&](std::uint64_t handle) {
    std::vector<std::vector<Access>> acc(c.procs);
    for (std::uint32_t r = 0; r < c.procs; ++r) acc[r].push_back({handle, dist, r * s, s});
    return acc;
  };

  const auto data = phase(1);
  auto w = model.run_phase(data, true);
  if (c.mode == ReadMode::cold) {
    const auto n = filler_files(c, s, daemon.cache.capacity);
    for (std::uint32_t f = 0; f < n; ++f) model.run_phase(phase(2 + f), true);
  }
  auto rd = model.run_phase(data, false);

  RunResult run;
  run.write_seconds = w.elapsed;
  run.read_seconds = rd.elapsed;
  run.write_bps = aggregate_bandwidth(c.procs, s, w.max_elapsed());
  run.read_bps = aggregate_bandwidth(c.procs, s, rd.max_elapsed());
  const double hit = static_cast<double>(rd.cost.cache_read);
  const double miss = static_cast<double>(rd.cost.disk_read());
  run.served_from_cache_pct = hit + miss > 0 ? 100.0 * hit / (hit + miss) : 0.0;
  return run;
}

// The same workload with real bytes at reduced size, cache scaled by the
// same factor so that flushes and evictions still happen.
void verify_small(const BenchConfig& c) {
  const auto daemon = c.daemon_config();
  const auto page = daemon.cache.page_size;
  const auto s = c.bytes_per_proc();
  const bool stripe_per_rank = c.stripe >= s;
  const auto unit = stripe_per_rank ? page : c.stripe;
  auto small = std::min(s, std::max(unit, c.verify_budget / c.procs));
  if (small < s) small = std::max(unit, small / unit * unit);

  ClusterRun run;
  run.backend = client::Backend::sim;
  run.net = profile_params(c.profile).net;
  run.daemon = daemon;
  run.daemon.throttle.enabled = false;
  const double scale = static_cast<double>(small) / static_cast<double>(s);
  auto cap = static_cast<std::uint64_t>(static_cast<double>(daemon.cache.capacity) * scale) / page * page;
  run.daemon.cache.capacity = std::max(cap, 4 * page);
  run.procs = c.procs;
  run.iods = c.iods;
  run.bytes = small;
  run.stripe = stripe_per_rank ? small : c.stripe;
  run.fillers = c.mode == ReadMode::cold ? filler_files(c, small, run.daemon.cache.capacity) : 0;
  run.seed = c.seed;
  run_on_cluster(run);
}

BenchResult summarize(const BenchConfig& c, std::vector<RunResult> runs) {
  BenchResult r;
  r.config = c;
  std::vector<double> wb, rb;
  double pct = 0.0;
  for (const auto& run : runs) {
    wb.push_back(run.write_bps);
    rb.push_back(run.read_bps);
    pct += run.served_from_cache_pct;
  }
  r.write_bps = trim_mean(wb);
  r.read_bps = trim_mean(rb);
  r.served_from_cache_pct = pct / static_cast<double>(runs.size());
  r.runs = std::move(runs);
  return r;
}

BenchResult run(const BenchConfig& c) {
  c.validate();
  std::vector<RunResult> runs;
  if (c.profile == Profile::sim) {
    verify_small(c);
    for (std::uint32_t i = 0; i < c.repeats; ++i) runs.push_back(simulate(c, i));
  } else {
    const auto prof = profile_params(c.profile);
    for (std::uint32_t i = 0; i < c.repeats; ++i) {
      ClusterRun run;
      run.backend = client::Backend::socket;
      run.net = prof.net;
      run.daemon = c.daemon_config();
      run.wall_pacing = true;
      run.procs = c.procs;
      run.iods = c.iods;
      run.bytes = c.bytes_per_proc();
      run.stripe = c.stripe;
      run.fillers = c.mode == ReadMode::cold ? filler_files(c, run.bytes, run.daemon.cache.capacity) : 0;
      run.seed = c.seed + i;
      run.launch = c.launch;
      run.worker_exe = c.worker_exe;
      runs.push_back(run_on_cluster(run));
    }
  }
  auto result = summarize(c, std::move(runs));
  result.verified = true;
  return result;
}

}  // namespace

BenchResult run_concurrent_rw(const BenchConfig& config) { return run(config); }

BenchResult run_cold_read(const BenchConfig& config) {
  BenchConfig c = config;
  c.mode = ReadMode::cold;
  return run(c);
}

BenchResult run_large_stripe(BenchConfig config) {
  if (config.procs != config.iods) raise(Errc::config, "large-stripe runs need as many processes as daemons");
  const auto s = config.bytes_per_proc();
  config.per_proc_bytes = s;
  config.stripe = s;
  const layout::Distribution dist = layout::StripeSpec{s, config.iods, 0};
  std::set<std::uint32_t> used;
  for (std::uint32_t r = 0; r < config.procs; ++r) {
    auto ext = layout::logical_to_physical(r * s, s, dist);
    if (ext.size() != 1 || !used.insert(ext.front().iod).second) {
      raise(Errc::validation, "rank " + std::to_string(r) + " does not map to a single daemon of its own");
    }
  }
  return run(config);
}

}  // namespace stripefs::bench
