#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stripefs/client/client.hpp"
#include "stripefs/client/config.hpp"
#include "stripefs/iod/server.hpp"
#include "stripefs/metamgr/server.hpp"

namespace stripefs::client {

struct LocalClusterOptions {
  Backend backend = Backend::sim;
  transport::SimParams sim;
  std::uint32_t n_iods = 4;
  /// Empty: a single partition "pvfs1" holding every daemon.
  std::vector<metamgr::PartitionConfig> partitions;
  iod::DaemonConfig daemon;
  /// Sub-files go to files under this directory; memory otherwise.
  std::optional<std::filesystem::path> storage_dir;
  std::optional<std::string> journal_path;
  /// Charge throttled daemon time against the wall clock.
  bool wall_pacing = false;
  ClientOptions client;
  /// Socket backend address table; by default every node gets an ephemeral
  /// loopback port and room is left for 4096 clients.
  std::vector<transport::SocketNode> socket_nodes;
};

/// Daemons, a manager and clients in one process. Daemons are nodes
/// 0..n_iods-1, the manager is node n_iods and client i is node n_iods+1+i.
class LocalCluster {
 public:
  explicit LocalCluster(LocalClusterOptions options);
  ~LocalCluster();

  LocalCluster(const LocalCluster&) = delete;
  LocalCluster& operator=(const LocalCluster&) = delete;

  transport::Transport& transport() noexcept { return *transport_; }
  const LocalClusterOptions& options() const noexcept { return options_; }

  NodeId iod_node(std::uint32_t i) const { return NodeId{i}; }
  NodeId manager_node() const { return NodeId{options_.n_iods}; }
  NodeId client_node(std::uint32_t i) const { return NodeId{options_.n_iods + 1 + i}; }

  std::unique_ptr<Client> make_client(std::uint32_t i);
  iod::Daemon& daemon(std::uint32_t i) { return *daemons_.at(i); }
  metamgr::Manager& manager() { return manager_->manager(); }

  /// Stops the manager and starts a fresh one from the journal.
  void restart_manager();
  /// Takes daemon i off the network; requests to it fail as unreachable.
  void stop_iod(std::uint32_t i);

 private:
  void start_manager();

  LocalClusterOptions options_;
  std::vector<metamgr::Partition> partitions_;
  std::unique_ptr<transport::Transport> transport_;
  std::vector<std::unique_ptr<iod::Daemon>> daemons_;
  std::vector<std::unique_ptr<iod::IodServer>> servers_;
  std::unique_ptr<metamgr::ManagerServer> manager_;
};

}  // namespace stripefs::client
