// stripefsd: runs an I/O daemon or the metadata manager for one node.

#include <csignal>
#include <cstdio>
#include <memory>

#include "CLI11.hpp"
#include "stripefs/client/config.hpp"
#include "stripefs/iod/server.hpp"
#include "stripefs/metamgr/server.hpp"

namespace sc = stripefs::client;
using stripefs::Errc;
using stripefs::transport::NodeId;

namespace {

std::unique_ptr<stripefs::iod::Daemon> make_daemon(const sc::ClusterConfig& cfg, std::uint32_t node) {
  std::unique_ptr<stripefs::iod::BackingStore> store;
  if (cfg.storage_dir) {
    store = std::make_unique<stripefs::iod::FileStore>(std::filesystem::path(*cfg.storage_dir) /
                                                       ("iod" + std::to_string(node)));
  } else {
    store = std::make_unique<stripefs::iod::MemoryStore>();
  }
  std::shared_ptr<stripefs::iod::Pacer> pacer;
  if (cfg.daemon.throttle.enabled) pacer = std::make_shared<stripefs::iod::WallPacer>();
  return std::make_unique<stripefs::iod::Daemon>(cfg.daemon, std::move(store), pacer);
}

bool in_partition(const sc::ClusterConfig& cfg, NodeId id) {
  for (const auto& p : cfg.partitions) {
    for (auto n : p.nodes) {
      if (n == id) return true;
    }
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stripefs node daemon"};
  std::string role;
  std::uint32_t node = 0;
  std::string config_path;
  app.add_option("--role", role, "iod | mgr")->required()->check(CLI::IsMember({"iod", "mgr"}));
  app.add_option("--node-id", node)->required();
  app.add_option("--config", config_path)->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 4;
  }

  // Block the stop signals before any thread starts so that only sigwait sees them.
  sigset_t stop;
  sigemptyset(&stop);
  sigaddset(&stop, SIGINT);
  sigaddset(&stop, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop, nullptr);

  try {
    const auto cfg = sc::load_config(config_path);
    auto transport = sc::make_transport(cfg);
    const NodeId self{node};

    std::unique_ptr<stripefs::iod::Daemon> daemon;
    std::unique_ptr<stripefs::iod::IodServer> iod_server;
    std::unique_ptr<stripefs::metamgr::ManagerServer> mgr_server;
    if (role == "iod") {
      if (!in_partition(cfg, self)) stripefs::raise(Errc::config, "node " + std::to_string(node) + " is in no partition");
      daemon = make_daemon(cfg, node);
      iod_server = std::make_unique<stripefs::iod::IodServer>(*transport, self, *daemon);
    } else {
      if (cfg.manager() != self) {
        stripefs::raise(Errc::config, "the configured manager is node " + std::to_string(cfg.manager().value));
      }
      stripefs::metamgr::ManagerOptions mo;
      mo.partitions = stripefs::metamgr::partition_setup(cfg.partitions);
      mo.journal_path = cfg.journal_path;
      // The management node is also a daemon of its partition.
      if (in_partition(cfg, self)) {
        daemon = make_daemon(cfg, node);
        mo.local_daemon = daemon.get();
      }
      mgr_server = std::make_unique<stripefs::metamgr::ManagerServer>(*transport, self, std::move(mo));
    }
    std::fprintf(stderr, "stripefsd: %s on node %u ready\n", role.c_str(), node);

    int sig = 0;
    sigwait(&stop, &sig);
    mgr_server.reset();
    iod_server.reset();
    // Dirty pages would otherwise die with the process.
    if (daemon) daemon->flush_dirty(std::nullopt);
    return 0;
  } catch (const stripefs::Error& e) {
    std::fprintf(stderr, "stripefsd: %s\n", e.what());
    return e.code() == Errc::config ? 4 : 3;
  }
}
