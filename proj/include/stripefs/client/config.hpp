#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stripefs/iod/daemon.hpp"
#include "stripefs/metamgr/partition.hpp"
#include "stripefs/transport/sim_transport.hpp"
#include "stripefs/transport/socket_transport.hpp"

namespace stripefs::client {

enum class Backend { sim, socket };

/// Cluster description, usually read from the JSON file named by
/// STRIPEFS_CONFIG. Recognized keys:
///   transport.backend ("sim" | "socket"), transport.latency_us,
///   transport.bandwidth_bps, nodes[i].host, nodes[i].port,
///   partitions[].name, partitions[].nodes, metamgr.journal_path,
///   metamgr.node, iod.storage_dir, iod.cache_capacity, iod.dirty_threshold,
///   iod.page_size, iod.throttle.{enabled, disk_write_bps, disk_read_bps,
///   cache_read_bps, cache_write_bps, concurrent_read_penalty}
struct ClusterConfig {
  Backend backend = Backend::sim;
  transport::SimParams sim;
  std::vector<transport::SocketNode> nodes;
  std::vector<metamgr::PartitionConfig> partitions;
  /// Defaults to the management node of the first partition.
  std::optional<std::uint32_t> manager_node;
  std::optional<std::string> journal_path;
  std::optional<std::string> storage_dir;
  iod::DaemonConfig daemon;

  metamgr::NodeId manager() const;
};

/// Raises Errc::config for unreadable files, bad JSON and bad values.
ClusterConfig parse_config(const std::string& json_text);
ClusterConfig load_config(const std::string& path);
/// Loads the file named by STRIPEFS_CONFIG; empty when it is unset.
std::optional<ClusterConfig> config_from_env();

std::unique_ptr<transport::Transport> make_transport(const ClusterConfig& config);

}  // namespace stripefs::client
