#include "stripefs/metamgr/partition.hpp"

#include <set>

#include "stripefs/common/error.hpp"

namespace stripefs::metamgr {

std::vector<Partition> partition_setup(const std::vector<PartitionConfig>& config) {
  std::vector<Partition> out;
  std::set<NodeId> seen;
  std::set<std::string> names;
  for (const auto& pc : config) {
    if (pc.nodes.empty()) raise(Errc::config, "partition '" + pc.name + "' has no nodes");
    if (!names.insert(pc.name).second) raise(Errc::config, "partition '" + pc.name + "' defined twice");
    for (auto n : pc.nodes) {
      if (!seen.insert(n).second) {
        raise(Errc::config, "node " + transport::to_string(n) + " appears in more than one partition slot");
      }
    }
    out.push_back({pc.name, pc.nodes, pc.nodes.back()});
  }
  return out;
}

std::vector<PartitionConfig> split_evenly(std::uint32_t total_nodes, std::uint32_t count, const std::string& prefix) {
  if (count == 0 || total_nodes % count != 0) raise(Errc::config, "node count does not split evenly");
  std::vector<PartitionConfig> out;
  const std::uint32_t size = total_nodes / count;
  for (std::uint32_t p = 0; p < count; ++p) {
    PartitionConfig pc{prefix + std::to_string(p + 1), {}};
    for (std::uint32_t i = 0; i < size; ++i) pc.nodes.push_back(NodeId{p * size + i});
    out.push_back(std::move(pc));
  }
  return out;
}

}  // namespace stripefs::metamgr
