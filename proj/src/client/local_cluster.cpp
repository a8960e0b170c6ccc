#include "stripefs/client/local_cluster.hpp"

namespace stripefs::client {

LocalCluster::LocalCluster(LocalClusterOptions options) : options_(std::move(options)) {
  if (options_.n_iods == 0) raise(Errc::config, "cluster needs at least one daemon");
  if (options_.partitions.empty()) {
    metamgr::PartitionConfig all{"pvfs1", {}};
    for (std::uint32_t i = 0; i < options_.n_iods; ++i) all.nodes.push_back(NodeId{i});
    options_.partitions.push_back(std::move(all));
  }
  partitions_ = metamgr::partition_setup(options_.partitions);
  for (const auto& p : partitions_) {
    for (auto n : p.nodes) {
      if (n.value >= options_.n_iods) raise(Errc::config, "partition names a node that runs no daemon");
    }
  }

  if (options_.backend == Backend::socket) {
    auto nodes = options_.socket_nodes;
    if (nodes.empty()) nodes.resize(options_.n_iods + 1 + 4096);
    if (nodes.size() <= options_.n_iods) raise(Errc::config, "socket table too small for the cluster");
    transport_ = std::make_unique<transport::SocketTransport>(std::move(nodes));
  } else {
    transport_ = std::make_unique<transport::SimTransport>(options_.sim);
  }

  for (std::uint32_t i = 0; i < options_.n_iods; ++i) {
    std::unique_ptr<iod::BackingStore> store;
    if (options_.storage_dir) {
      store = std::make_unique<iod::FileStore>(*options_.storage_dir / ("iod" + std::to_string(i)));
    } else {
      store = std::make_unique<iod::MemoryStore>();
    }
    std::shared_ptr<iod::Pacer> pacer;
    if (options_.daemon.throttle.enabled) {
      if (options_.wall_pacing) {
        pacer = std::make_shared<iod::WallPacer>();
      } else {
        pacer = std::make_shared<iod::VirtualPacer>();
      }
    }
    daemons_.push_back(std::make_unique<iod::Daemon>(options_.daemon, std::move(store), pacer));
    servers_.push_back(std::make_unique<iod::IodServer>(*transport_, NodeId{i}, *daemons_.back()));
  }
  start_manager();
}

LocalCluster::~LocalCluster() {
  manager_.reset();
  servers_.clear();
}

void LocalCluster::start_manager() {
  metamgr::ManagerOptions mo;
  mo.partitions = partitions_;
  mo.journal_path = options_.journal_path;
  manager_ = std::make_unique<metamgr::ManagerServer>(*transport_, manager_node(), std::move(mo));
}

void LocalCluster::restart_manager() {
  manager_.reset();
  start_manager();
}

void LocalCluster::stop_iod(std::uint32_t i) { servers_.at(i)->stop(); }

std::unique_ptr<Client> LocalCluster::make_client(std::uint32_t i) {
  if (options_.backend == Backend::socket) {
    const auto table = options_.socket_nodes.empty() ? options_.n_iods + 1 + 4096 : options_.socket_nodes.size();
    if (client_node(i).value >= table) raise(Errc::config, "too many clients for the node table");
  }
  return std::make_unique<Client>(*transport_, client_node(i), manager_node(), options_.client);
}

}  // namespace stripefs::client
