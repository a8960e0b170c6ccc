#include "stripefs/iod/server.hpp"

#include <algorithm>

#include "stripefs/common/error.hpp"

namespace stripefs::iod {

using transport::Incoming;
using transport::Response;

IodServer::IodServer(transport::Transport& transport, NodeId self, Daemon& daemon)
    : service_(daemon), endpoint_(transport, self) {
  worker_ = std::thread([this] { run(); });
}

IodServer::~IodServer() { stop(); }

void IodServer::stop() {
  stop_ = true;
  endpoint_.close();
  if (worker_.joinable()) worker_.join();
}

void IodServer::run() {
  while (!stop_) {
    auto in = endpoint_.next_request(std::chrono::milliseconds(100));
    if (in) service_.dispatch(endpoint_, *in);
  }
}

void IodService::dispatch(transport::Endpoint& endpoint, const Incoming& in) {
  if (in.request.opcode == static_cast<std::uint8_t>(Op::gather)) {
    on_gather(endpoint, in);
    return;
  }
  Response reply = handle(in.request);
  try {
    endpoint.send_response(in.src, reply);
  } catch (const Error&) {
    // Requester went away; nothing to tell it.
  }
}

Response IodService::handle(const transport::Request& req) {
  try {
    switch (static_cast<Op>(req.opcode)) {
      case Op::create:
        daemon_.create(req.handle);
        return transport::ok_response();
      case Op::remove:
        daemon_.remove(req.handle);
        return transport::ok_response();
      case Op::stat:
        return transport::ok_response(encode_stat(daemon_.stat(req.handle)));
      case Op::flush: {
        std::optional<std::uint64_t> which;
        if (req.handle != kAllHandles) which = req.handle;
        auto report = daemon_.flush_dirty(which);
        if (!report.failed.empty()) {
          return transport::error_response(Errc::storage, "flush failed for some pages", report.bytes);
        }
        return transport::ok_response();
      }
      case Op::write: {
        auto pin = daemon_.pin(req.handle);
        daemon_.handle_write(req.handle, req.offset, req.payload);
        return transport::ok_response();
      }
      case Op::read: {
        auto pin = daemon_.pin(req.handle);
        return transport::ok_response(daemon_.handle_read(req.handle, req.offset, req.length).data);
      }
      default:
        return transport::error_response(Errc::protocol, "unknown opcode " + std::to_string(req.opcode));
    }
  } catch (const StorageFailure& e) {
    return transport::error_response(e, e.accepted());
  } catch (const Error& e) {
    return transport::error_response(e);
  }
}

void IodService::on_gather(transport::Endpoint& endpoint, const Incoming& in) {
  GatherPart part;
  try {
    part = decode_gather(in.request.payload);
  } catch (const Error& e) {
    endpoint.send_response(in.src, transport::error_response(e));
    return;
  }
  auto key = std::make_pair(in.request.handle, in.request.offset);
  auto& pending = gathers_[key];
  pending.parts.emplace_back(in.src, std::move(part));
  const auto& first = pending.parts.front().second;
  if (pending.parts.size() < first.participants) return;

  complete_gather(endpoint, in.request.handle, pending);
  gathers_.erase(key);
}

void IodService::complete_gather(transport::Endpoint& endpoint, std::uint64_t handle, PendingGather& pending) {
  auto& parts = pending.parts;
  std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.second.rank < b.second.rank; });

  std::vector<Response> replies(parts.size());
  try {
    const auto& head = parts.front().second;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto& p = parts[i].second;
      if (p.participants != head.participants || p.direction != head.direction || p.rank != i) {
        raise(Errc::protocol, "inconsistent gather parts");
      }
    }

    // Flatten to requests in rank order; this order decides overlapping writes.
    std::vector<GatherRequest> requests;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto& p = parts[i].second;
      std::size_t pos = 0;
      for (const auto& e : p.entries) {
        GatherRequest r{p.rank, e.offset, e.length, {}};
        if (p.direction == Direction::write) {
          r.data.assign(p.data.begin() + static_cast<std::ptrdiff_t>(pos),
                        p.data.begin() + static_cast<std::ptrdiff_t>(pos + e.length));
          pos += e.length;
        }
        requests.push_back(std::move(r));
        owner.push_back(i);
      }
    }

    auto pin = daemon_.pin(handle);
    auto result = daemon_.disk_directed_serve(handle, requests, head.direction);

    std::vector<GatherReply> out(parts.size());
    for (std::size_t k = 0; k < requests.size(); ++k) {
      auto& reply = out[owner[k]];
      if (head.direction == Direction::read) {
        reply.lengths.push_back(result.data[k].size());
        reply.data.insert(reply.data.end(), result.data[k].begin(), result.data[k].end());
      } else {
        reply.lengths.push_back(result.accepted[k]);
      }
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
      out[i].overlap = result.overlap;
      replies[i] = transport::ok_response(encode_gather_reply(out[i]));
    }
  } catch (const Error& e) {
    for (auto& r : replies) r = transport::error_response(e);
  }

  for (std::size_t i = 0; i < parts.size(); ++i) {
    try {
      endpoint.send_response(parts[i].first, replies[i]);
    } catch (const Error&) {
    }
  }
}

}  // namespace stripefs::iod
