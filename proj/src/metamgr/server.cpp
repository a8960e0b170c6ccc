#include "stripefs/metamgr/server.hpp"

#include "stripefs/common/error.hpp"
#include "stripefs/iod/protocol.hpp"
#include "stripefs/metamgr/protocol.hpp"

namespace stripefs::metamgr {

using transport::Response;

void EndpointAdmin::create_subfile(NodeId iod, std::uint64_t handle) {
  if (local_ != nullptr && iod == ep_.id()) {
    local_->create(handle);
    return;
  }
  iod::RemoteIod(ep_, iod).create(handle);
}

void EndpointAdmin::remove_subfile(NodeId iod, std::uint64_t handle) {
  if (local_ != nullptr && iod == ep_.id()) {
    local_->remove(handle);
    return;
  }
  iod::RemoteIod(ep_, iod).remove(handle);
}

ManagerServer::ManagerServer(transport::Transport& transport, NodeId self, ManagerOptions options)
    : endpoint_(transport, self), admin_(endpoint_, options.local_daemon) {
  manager_ = std::make_unique<Manager>(std::move(options.partitions), admin_, std::move(options.journal_path));
  if (options.local_daemon != nullptr) local_service_.emplace(*options.local_daemon);
  worker_ = std::thread([this] { run(); });
}

ManagerServer::~ManagerServer() { stop(); }

void ManagerServer::stop() {
  stop_ = true;
  endpoint_.close();
  if (worker_.joinable()) worker_.join();
}

void ManagerServer::run() {
  while (!stop_) {
    auto in = endpoint_.next_request(std::chrono::milliseconds(100));
    if (!in) continue;
    if (in->request.opcode == static_cast<std::uint8_t>(Op::barrier)) {
      on_barrier(*in);
      continue;
    }
    if (!is_manager_op(in->request.opcode) && local_service_) {
      local_service_->dispatch(endpoint_, *in);
      continue;
    }
    Response reply = handle(in->request);
    try {
      endpoint_.send_response(in->src, reply);
    } catch (const Error&) {
    }
  }
}

void ManagerServer::on_barrier(const transport::Incoming& in) {
  const auto participants = in.request.offset;
  if (participants == 0) {
    endpoint_.send_response(in.src, transport::error_response(Errc::protocol, "barrier without participants"));
    return;
  }
  auto& arrived = barriers_[in.request.handle];
  arrived.push_back(in.src);
  if (arrived.size() < participants) return;
  auto waiting = std::move(arrived);
  barriers_.erase(in.request.handle);
  for (auto node : waiting) {
    try {
      endpoint_.send_response(node, transport::ok_response());
    } catch (const Error&) {
    }
  }
}

Response ManagerServer::handle(const transport::Request& req) {
  try {
    WireReader r(req.payload);
    WireWriter w;
    switch (static_cast<Op>(req.opcode)) {
      case Op::create: {
        auto path = r.str();
        auto partition = r.str();
        auto dist = decode_distribution(r);
        encode_meta(w, manager_->create_file(path, dist, partition));
        break;
      }
      case Op::open:
        encode_meta(w, manager_->open(r.str()));
        break;
      case Op::remove:
        manager_->remove(r.str());
        break;
      case Op::size:
        w.u64(manager_->update_size(req.handle, req.offset));
        break;
      case Op::list: {
        auto files = manager_->list();
        w.u32(static_cast<std::uint32_t>(files.size()));
        for (const auto& m : files) encode_meta(w, m);
        break;
      }
      default:
        return transport::error_response(Errc::protocol, "unknown opcode " + std::to_string(req.opcode));
    }
    return transport::ok_response(w.take());
  } catch (const Error& e) {
    return transport::error_response(e);
  }
}

}  // namespace stripefs::metamgr
