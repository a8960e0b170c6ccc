#pragma once

#include <cstdint>
#include <string>

#include "stripefs/bench/ranks.hpp"
#include "stripefs/bench/workload.hpp"
#include "stripefs/client/config.hpp"

namespace stripefs::bench {

/// One benchmark run on real daemons.
struct ClusterRun {
  client::Backend backend = client::Backend::sim;
  transport::SimParams net;
  iod::DaemonConfig daemon;
  bool wall_pacing = false;
  std::uint32_t procs = 1;
  std::uint32_t iods = 1;
  std::uint64_t bytes = 0;  // per process
  std::uint64_t stripe = 64 * 1024;
  std::uint32_t fillers = 0;
  std::uint64_t seed = 1;
  Launch launch = Launch::threads;
  std::string worker_exe;
};

/// Starts a fresh cluster, runs every rank and tears it down. Raises
/// Errc::integrity if any rank reads back different bytes, and the rank's
/// error code otherwise.
RunResult run_on_cluster(const ClusterRun& run);

/// Body of a worker process: joins the cluster described by the config
/// file as client node `node` and runs one rank. Prints the report line on
/// stdout. Returns 0, 2 on an integrity failure, 3 on other errors.
int worker_main(const std::string& config_path, std::uint32_t node, const RankSpec& spec);

}  // namespace stripefs::bench
