#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <thread>
#include <utility>
#include <vector>

#include "stripefs/iod/daemon.hpp"
#include "stripefs/iod/protocol.hpp"
#include "stripefs/transport/endpoint.hpp"

namespace stripefs::iod {

/// Request handling for one Daemon, independent of who runs the loop.
class IodService {
 public:
  explicit IodService(Daemon& daemon) : daemon_(daemon) {}

  Daemon& daemon() noexcept { return daemon_; }

  /// Handles one request and sends whatever responses it completes. A
  /// disk-directed part is held until every participant's part is in.
  void dispatch(transport::Endpoint& endpoint, const transport::Incoming& in);

  transport::Response handle(const transport::Request& request);

 private:
  struct PendingGather {
    std::vector<std::pair<NodeId, GatherPart>> parts;
  };

  void on_gather(transport::Endpoint& endpoint, const transport::Incoming& in);
  void complete_gather(transport::Endpoint& endpoint, std::uint64_t handle, PendingGather& pending);

  Daemon& daemon_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, PendingGather> gathers_;  // (handle, collective id)
};

/// Serves one Daemon on a transport node. Requests are handled one at a
/// time in arrival order on a private worker thread.
class IodServer {
 public:
  IodServer(transport::Transport& transport, NodeId self, Daemon& daemon);
  ~IodServer();

  IodServer(const IodServer&) = delete;
  IodServer& operator=(const IodServer&) = delete;

  NodeId id() const noexcept { return endpoint_.id(); }
  void stop();

 private:
  void run();

  IodService service_;
  transport::Endpoint endpoint_;
  std::atomic<bool> stop_{false};
  std::thread worker_;
};

}  // namespace stripefs::iod
