#include "stripefs/metamgr/protocol.hpp"

namespace stripefs::metamgr {

void encode_distribution(WireWriter& w, const layout::Distribution& dist) {
  w.u8(static_cast<std::uint8_t>(dist.kind()));
  std::visit(
      [&w](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, layout::StripeSpec>) {
          w.u64(rule.stripe_size);
          w.u32(rule.n_iods);
          w.u32(rule.base_iod);
        } else if constexpr (std::is_same_v<T, layout::BlockCyclic>) {
          w.u64(rule.block);
          w.u32(rule.n_iods);
        } else {
          w.u32(static_cast<std::uint32_t>(rule.extents.size()));
          for (const auto& e : rule.extents) {
            w.u32(e.iod);
            w.u64(e.length);
          }
        }
      },
      dist.rule());
}

layout::Distribution decode_distribution(WireReader& r) {
  switch (static_cast<layout::DistributionKind>(r.u8())) {
    case layout::DistributionKind::round_robin: {
      layout::StripeSpec s;
      s.stripe_size = r.u64();
      s.n_iods = r.u32();
      s.base_iod = r.u32();
      return s;
    }
    case layout::DistributionKind::block_cyclic: {
      layout::BlockCyclic b;
      b.block = r.u64();
      b.n_iods = r.u32();
      return b;
    }
    case layout::DistributionKind::irregular: {
      layout::Irregular irr;
      auto n = r.u32();
      if (n > r.remaining() / 12) raise(Errc::protocol, "irregular extent count too large");
      irr.extents.resize(n);
      for (auto& e : irr.extents) {
        e.iod = r.u32();
        e.length = r.u64();
      }
      return irr;
    }
  }
  raise(Errc::protocol, "unknown distribution kind");
}

void encode_meta(WireWriter& w, const FileMeta& meta) {
  w.str(meta.path);
  w.u64(meta.handle);
  encode_distribution(w, meta.dist);
  w.u32(static_cast<std::uint32_t>(meta.iod_list.size()));
  for (auto n : meta.iod_list) w.u32(n.value);
  w.u64(meta.logical_size);
  w.str(meta.partition);
}

FileMeta decode_meta(WireReader& r) {
  FileMeta meta;
  meta.path = r.str();
  meta.handle = r.u64();
  meta.dist = decode_distribution(r);
  auto n = r.u32();
  if (n > r.remaining() / 4) raise(Errc::protocol, "iod list too long");
  for (std::uint32_t i = 0; i < n; ++i) meta.iod_list.push_back(NodeId{r.u32()});
  meta.logical_size = r.u64();
  meta.partition = r.str();
  return meta;
}

transport::Response RemoteManager::call(Op op, std::uint64_t handle, std::uint64_t offset, Bytes payload) {
  transport::Request req;
  req.opcode = static_cast<std::uint8_t>(op);
  req.handle = handle;
  req.offset = offset;
  req.length = payload.size();
  req.payload = std::move(payload);
  ep_.send_request(node_, req);
  auto resp = ep_.await_response(node_);
  transport::check(resp);
  return resp;
}

FileMeta RemoteManager::create_file(const std::string& path, const layout::Distribution& dist,
                                    const std::string& partition) {
  WireWriter w;
  w.str(path);
  w.str(partition);
  encode_distribution(w, dist);
  auto resp = call(Op::create, 0, 0, w.take());
  WireReader r(resp.payload);
  return decode_meta(r);
}

FileMeta RemoteManager::open(const std::string& path) {
  WireWriter w;
  w.str(path);
  auto resp = call(Op::open, 0, 0, w.take());
  WireReader r(resp.payload);
  return decode_meta(r);
}

void RemoteManager::remove(const std::string& path) {
  WireWriter w;
  w.str(path);
  call(Op::remove, 0, 0, w.take());
}

std::uint64_t RemoteManager::update_size(std::uint64_t handle, std::uint64_t high_water) {
  auto resp = call(Op::size, handle, high_water, {});
  WireReader r(resp.payload);
  return r.u64();
}

std::vector<FileMeta> RemoteManager::list() {
  auto resp = call(Op::list, 0, 0, {});
  WireReader r(resp.payload);
  auto n = r.u32();
  std::vector<FileMeta> out;
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(decode_meta(r));
  return out;
}

void RemoteManager::barrier(std::uint64_t id, std::uint32_t participants, std::chrono::milliseconds timeout) {
  transport::Request req;
  req.opcode = static_cast<std::uint8_t>(Op::barrier);
  req.handle = id;
  req.offset = participants;
  ep_.send_request(node_, req);
  transport::check(ep_.await_response(node_, timeout));
}

}  // namespace stripefs::metamgr
