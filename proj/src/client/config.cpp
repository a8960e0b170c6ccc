#include "stripefs/client/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "stripefs/common/error.hpp"

namespace stripefs::client {

using nlohmann::json;

metamgr::NodeId ClusterConfig::manager() const {
  if (manager_node) return metamgr::NodeId{*manager_node};
  if (partitions.empty()) raise(Errc::config, "no partitions configured");
  return partitions.front().nodes.back();
}

namespace {

template <class T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

ClusterConfig parse_config(const std::string& json_text) {
  ClusterConfig cfg;
  try {
    const json root = json::parse(json_text);
    if (root.contains("transport")) {
      const auto& t = root.at("transport");
      if (t.contains("backend")) {
        auto b = t.at("backend").get<std::string>();
        if (b == "sim") {
          cfg.backend = Backend::sim;
        } else if (b == "socket") {
          cfg.backend = Backend::socket;
        } else {
          raise(Errc::config, "transport.backend must be \"sim\" or \"socket\"");
        }
      }
      read_opt(t, "latency_us", cfg.sim.latency_us);
      read_opt(t, "bandwidth_bps", cfg.sim.bandwidth_bps);
    }
    if (root.contains("nodes")) {
      for (const auto& n : root.at("nodes")) {
        transport::SocketNode node;
        read_opt(n, "host", node.host);
        read_opt(n, "port", node.port);
        cfg.nodes.push_back(node);
      }
    }
    if (root.contains("partitions")) {
      for (const auto& p : root.at("partitions")) {
        metamgr::PartitionConfig pc;
        pc.name = p.at("name").get<std::string>();
        for (const auto& n : p.at("nodes")) pc.nodes.push_back(metamgr::NodeId{n.get<std::uint32_t>()});
        cfg.partitions.push_back(std::move(pc));
      }
    }
    if (root.contains("metamgr")) {
      const auto& m = root.at("metamgr");
      if (m.contains("journal_path")) cfg.journal_path = m.at("journal_path").get<std::string>();
      if (m.contains("node")) cfg.manager_node = m.at("node").get<std::uint32_t>();
    }
    if (root.contains("iod")) {
      const auto& d = root.at("iod");
      if (d.contains("storage_dir")) cfg.storage_dir = d.at("storage_dir").get<std::string>();
      read_opt(d, "cache_capacity", cfg.daemon.cache.capacity);
      read_opt(d, "dirty_threshold", cfg.daemon.cache.dirty_threshold);
      read_opt(d, "page_size", cfg.daemon.cache.page_size);
      if (d.contains("throttle")) {
        const auto& t = d.at("throttle");
        read_opt(t, "enabled", cfg.daemon.throttle.enabled);
        read_opt(t, "disk_write_bps", cfg.daemon.throttle.disk_write_bps);
        read_opt(t, "disk_read_bps", cfg.daemon.throttle.disk_read_bps);
        read_opt(t, "cache_read_bps", cfg.daemon.throttle.cache_read_bps);
        read_opt(t, "cache_write_bps", cfg.daemon.throttle.cache_write_bps);
        read_opt(t, "concurrent_read_penalty", cfg.daemon.throttle.concurrent_read_penalty);
      }
    }
  } catch (const json::exception& e) {
    raise(Errc::config, std::string("bad config: ") + e.what());
  }

  try {
    cfg.sim.validate();
    cfg.daemon.cache.validate();
    cfg.daemon.throttle.validate();
  } catch (const Error& e) {
    raise(Errc::config, e.what());
  }
  if (cfg.partitions.empty()) raise(Errc::config, "no partitions configured");
  metamgr::partition_setup(cfg.partitions);
  if (cfg.backend == Backend::socket) {
    for (const auto& p : cfg.partitions) {
      for (auto n : p.nodes) {
        if (n.value >= cfg.nodes.size()) raise(Errc::config, "node " + std::to_string(n.value) + " has no address");
      }
    }
  }
  return cfg;
}

ClusterConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::config, "cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::optional<ClusterConfig> config_from_env() {
  const char* path = std::getenv("STRIPEFS_CONFIG");
  if (path == nullptr || *path == '\0') return std::nullopt;
  return load_config(path);
}

std::unique_ptr<transport::Transport> make_transport(const ClusterConfig& config) {
  if (config.backend == Backend::socket) return std::make_unique<transport::SocketTransport>(config.nodes);
  return std::make_unique<transport::SimTransport>(config.sim);
}

}  // namespace stripefs::client
