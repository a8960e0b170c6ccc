#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "stripefs/iod/server.hpp"
#include "stripefs/metamgr/manager.hpp"
#include "stripefs/transport/endpoint.hpp"

namespace stripefs::metamgr {

/// DaemonAdmin over the wire. When the manager node also runs a daemon,
/// requests for that node go straight to it.
class EndpointAdmin final : public DaemonAdmin {
 public:
  EndpointAdmin(transport::Endpoint& endpoint, iod::Daemon* local) : ep_(endpoint), local_(local) {}

  void create_subfile(NodeId iod, std::uint64_t handle) override;
  void remove_subfile(NodeId iod, std::uint64_t handle) override;

 private:
  transport::Endpoint& ep_;
  iod::Daemon* local_;
};

struct ManagerOptions {
  std::vector<Partition> partitions;
  std::optional<std::string> journal_path;
  /// Daemon co-located on the manager's node, if any.
  iod::Daemon* local_daemon = nullptr;
};

/// Runs a Manager on a transport node, one request at a time.
class ManagerServer {
 public:
  ManagerServer(transport::Transport& transport, NodeId self, ManagerOptions options);
  ~ManagerServer();

  ManagerServer(const ManagerServer&) = delete;
  ManagerServer& operator=(const ManagerServer&) = delete;

  NodeId id() const noexcept { return endpoint_.id(); }
  Manager& manager() noexcept { return *manager_; }
  void stop();

 private:
  void run();
  void on_barrier(const transport::Incoming& in);
  transport::Response handle(const transport::Request& request);

  transport::Endpoint endpoint_;
  EndpointAdmin admin_;
  std::unique_ptr<Manager> manager_;
  std::optional<iod::IodService> local_service_;
  std::map<std::uint64_t, std::vector<NodeId>> barriers_;  // id -> arrived nodes
  std::atomic<bool> stop_{false};
  std::thread worker_;
};

}  // namespace stripefs::metamgr
