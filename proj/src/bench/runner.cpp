#include "stripefs/bench/runner.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "json.hpp"
#include "stripefs/bench/stats.hpp"
#include "stripefs/client/local_cluster.hpp"

extern char** environ;

namespace stripefs::bench {

namespace {

// Loopback ports that were free a moment ago. All are held open together so
// that the kernel hands out distinct ones.
std::vector<std::uint16_t> free_ports(std::size_t n) {
  std::vector<int> fds;
  std::vector<std::uint16_t> ports;
  for (std::size_t i = 0; i < n; ++i) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) break;
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    socklen_t len = sizeof addr;
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
      ::close(fd);
      break;
    }
    fds.push_back(fd);
    ports.push_back(ntohs(addr.sin_port));
  }
  for (int fd : fds) ::close(fd);
  if (ports.size() != n) raise(Errc::config, "cannot reserve loopback ports for worker processes");
  return ports;
}

std::vector<RankReport> run_threads(client::LocalCluster& cluster, const std::vector<RankSpec>& specs) {
  std::vector<std::unique_ptr<client::Client>> clients;
  for (const auto& s : specs) clients.push_back(cluster.make_client(s.rank));
  std::vector<RankReport> reports(specs.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    threads.emplace_back([&, i] { reports[i] = run_rank(*clients[i], specs[i]); });
  }
  for (auto& t : threads) t.join();
  return reports;
}

std::vector<RankReport> run_processes(client::LocalCluster& cluster, const ClusterRun& run,
                                      const std::vector<RankSpec>& specs) {
  auto& sock = dynamic_cast<transport::SocketTransport&>(cluster.transport());
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : cluster.options().socket_nodes) nodes.push_back({{"host", n.host}, {"port", n.port}});
  for (std::uint32_t i = 0; i <= run.iods; ++i) {
    nodes[i]["port"] = sock.node(transport::NodeId{i}).port;
  }
  nlohmann::json partition_nodes = nlohmann::json::array();
  for (std::uint32_t i = 0; i < run.iods; ++i) partition_nodes.push_back(i);
  nlohmann::json cfg = {
      {"transport", {{"backend", "socket"}}},
      {"nodes", nodes},
      {"partitions", nlohmann::json::array({{{"name", "pvfs1"}, {"nodes", partition_nodes}}})},
      {"metamgr", {{"node", run.iods}}},
  };
  const auto cfg_path = std::filesystem::temp_directory_path() /
                        ("stripefs-bench-" + std::to_string(::getpid()) + "-" + std::to_string(run.seed) + ".json");
  {
    std::ofstream out(cfg_path);
    out << cfg.dump(1);
  }

  struct Child {
    pid_t pid = -1;
    int out = -1;
  };
  std::vector<Child> children;
  for (const auto& s : specs) {
    std::vector<std::string> args = {run.worker_exe,
                                     "worker",
                                     "--config",
                                     cfg_path.string(),
                                     "--node",
                                     std::to_string(cluster.client_node(s.rank).value),
                                     "--rank",
                                     std::to_string(s.rank),
                                     "--procs",
                                     std::to_string(s.procs),
                                     "--path",
                                     s.path,
                                     "--bytes",
                                     std::to_string(s.bytes),
                                     "--seed",
                                     std::to_string(s.seed),
                                     "--barrier-base",
                                     std::to_string(s.barrier_base)};
    for (const auto& f : s.fillers) {
      args.push_back("--filler");
      args.push_back(f);
    }
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    int pipefd[2];
    if (::pipe(pipefd) != 0) raise(Errc::config, "pipe failed");
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, pipefd[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, pipefd[0]);
    pid_t pid = -1;
    int rc = posix_spawn(&pid, run.worker_exe.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(pipefd[1]);
    if (rc != 0) {
      ::close(pipefd[0]);
      raise(Errc::config, "cannot start worker " + run.worker_exe);
    }
    children.push_back({pid, pipefd[0]});
  }

  std::vector<RankReport> reports(specs.size());
  for (std::size_t i = 0; i < children.size(); ++i) {
    std::string text;
    char buf[4096];
    ssize_t n;
    while ((n = ::read(children[i].out, buf, sizeof buf)) > 0) text.append(buf, static_cast<std::size_t>(n));
    ::close(children[i].out);
    int status = 0;
    ::waitpid(children[i].pid, &status, 0);
    bool parsed = false;
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
      std::uint32_t rank = 0;
      RankReport r;
      if (parse_report(line, rank, r) && rank < reports.size()) {
        reports[rank] = r;
        parsed = true;
      }
    }
    if (!parsed) reports[i].error = "worker exited without a report";
  }
  std::filesystem::remove(cfg_path);
  return reports;
}

}  // namespace

RunResult run_on_cluster(const ClusterRun& run) {
  client::LocalClusterOptions opts;
  opts.backend = run.backend;
  opts.sim = run.net;
  opts.n_iods = run.iods;
  opts.daemon = run.daemon;
  opts.wall_pacing = run.wall_pacing;
  if (run.launch == Launch::processes) {
    if (run.backend != client::Backend::socket) raise(Errc::config, "worker processes need the socket backend");
    if (run.worker_exe.empty()) raise(Errc::config, "worker processes need an executable");
    // Daemons and manager listen on ephemeral ports; workers and the
    // harness's own client need fixed ones so every process agrees.
    opts.socket_nodes.resize(run.iods + 2 + run.procs);
    auto ports = free_ports(run.procs + 1);
    for (std::uint32_t i = 0; i <= run.procs; ++i) opts.socket_nodes[run.iods + 1 + i].port = ports[i];
  }
  client::LocalCluster cluster(opts);

  auto admin = cluster.make_client(run.procs);
  const layout::Distribution dist = layout::StripeSpec{run.stripe, run.iods, 0};
  const std::string path = "/bench/data";
  admin->close(admin->create(path, dist));
  std::vector<std::string> fillers;
  for (std::uint32_t i = 0; i < run.fillers; ++i) {
    fillers.push_back("/bench/filler" + std::to_string(i));
    admin->close(admin->create(fillers.back(), dist));
  }

  std::vector<RankSpec> specs;
  for (std::uint32_t r = 0; r < run.procs; ++r) {
    specs.push_back({r, run.procs, path, fillers, run.bytes, run.seed, 1});
  }

  std::uint64_t hit0 = 0, disk0 = 0;
  for (std::uint32_t i = 0; i < run.iods; ++i) {
    auto [h, d] = cluster.daemon(i).read_counters();
    hit0 += h;
    disk0 += d;
  }

  auto reports = run.launch == Launch::processes ? run_processes(cluster, run, specs) : run_threads(cluster, specs);

  std::uint64_t hit = 0, disk = 0;
  for (std::uint32_t i = 0; i < run.iods; ++i) {
    auto [h, d] = cluster.daemon(i).read_counters();
    hit += h;
    disk += d;
  }
  hit -= hit0;
  disk -= disk0;

  RunResult result;
  for (std::uint32_t r = 0; r < run.procs; ++r) {
    const auto& rep = reports[r];
    if (!rep.completed) raise(Errc::unreachable, "rank " + std::to_string(r) + ": " + rep.error);
    if (!rep.intact) raise(Errc::integrity, "rank " + std::to_string(r) + ": " + rep.error);
    result.write_seconds.push_back(rep.write_seconds);
    result.read_seconds.push_back(rep.read_seconds);
  }
  auto max_of = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
  result.write_bps = aggregate_bandwidth(run.procs, run.bytes, std::max(max_of(result.write_seconds), 1e-9));
  result.read_bps = aggregate_bandwidth(run.procs, run.bytes, std::max(max_of(result.read_seconds), 1e-9));
  result.served_from_cache_pct = hit + disk == 0 ? 0.0 : 100.0 * static_cast<double>(hit) / static_cast<double>(hit + disk);
  return result;
}

int worker_main(const std::string& config_path, std::uint32_t node, const RankSpec& spec) {
  RankReport report;
  try {
    auto cfg = client::load_config(config_path);
    auto transport = client::make_transport(cfg);
    client::Client c(*transport, transport::NodeId{node}, cfg.manager());
    report = run_rank(c, spec);
  } catch (const Error& e) {
    report.error = e.what();
  }
  std::cout << format_report(spec.rank, report) << std::endl;
  if (!report.completed) return 3;
  return report.intact ? 0 : 2;
}

}  // namespace stripefs::bench
