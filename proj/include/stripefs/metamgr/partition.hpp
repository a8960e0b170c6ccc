#pragma once

#include <string>
#include <vector>

#include "stripefs/transport/address.hpp"

namespace stripefs::metamgr {

using transport::NodeId;

struct PartitionConfig {
  std::string name;
  std::vector<NodeId> nodes;
};

/// A named set of daemon nodes. The last node is the partition's
/// management node.
struct Partition {
  std::string name;
  std::vector<NodeId> nodes;
  NodeId mgmt_node;

  bool operator==(const Partition&) const = default;
};

/// Validates the configured node lists and fixes each management node.
/// Empty, internally repeated or overlapping node lists and duplicate names
/// raise Errc::config.
std::vector<Partition> partition_setup(const std::vector<PartitionConfig>& config);

/// `count` consecutive partitions of `size` nodes each, named prefix1, prefix2, ...
std::vector<PartitionConfig> split_evenly(std::uint32_t total_nodes, std::uint32_t count,
                                          const std::string& prefix = "pvfs");

}  // namespace stripefs::metamgr
