#include "stripefs/iod/protocol.hpp"

namespace stripefs::iod {

using transport::Request;
using transport::Response;

Request make_request(Op op, std::uint64_t handle, std::uint64_t offset, std::uint64_t length, Bytes payload) {
  Request r;
  r.opcode = static_cast<std::uint8_t>(op);
  r.handle = handle;
  r.offset = offset;
  r.length = op == Op::read ? length : payload.size();
  r.payload = std::move(payload);
  return r;
}

Bytes encode_stat(const SubFileStat& st) {
  WireWriter w;
  w.u64(st.size);
  w.u64(st.resident_bytes);
  w.u64(st.dirty_bytes);
  w.u64(st.cache_hit_bytes);
  w.u64(st.disk_read_bytes);
  return w.take();
}

SubFileStat decode_stat(ByteView payload) {
  WireReader r(payload);
  SubFileStat st;
  st.size = r.u64();
  st.resident_bytes = r.u64();
  st.dirty_bytes = r.u64();
  st.cache_hit_bytes = r.u64();
  st.disk_read_bytes = r.u64();
  return st;
}

Bytes encode_gather(const GatherPart& part) {
  WireWriter w;
  w.u32(part.participants);
  w.u32(part.rank);
  w.u8(static_cast<std::uint8_t>(part.direction));
  w.u32(static_cast<std::uint32_t>(part.entries.size()));
  for (const auto& e : part.entries) {
    w.u64(e.offset);
    w.u64(e.length);
  }
  w.bytes(part.data);
  return w.take();
}

GatherPart decode_gather(ByteView payload) {
  WireReader r(payload);
  GatherPart part;
  part.participants = r.u32();
  part.rank = r.u32();
  auto dir = r.u8();
  if (dir > 1) raise(Errc::protocol, "bad gather direction");
  part.direction = static_cast<Direction>(dir);
  auto n = r.u32();
  if (n > r.remaining() / 16) raise(Errc::protocol, "gather entry count too large");
  std::uint64_t total = 0;
  part.entries.resize(n);
  for (auto& e : part.entries) {
    e.offset = r.u64();
    e.length = r.u64();
    total += e.length;
  }
  if (part.participants == 0 || part.rank >= part.participants) raise(Errc::protocol, "bad gather rank");
  auto rest = r.rest();
  if (part.direction == Direction::write && rest.size() != total) {
    raise(Errc::protocol, "gather write data does not match its entries");
  }
  part.data.assign(rest.begin(), rest.end());
  return part;
}

Bytes encode_gather_reply(const GatherReply& reply) {
  WireWriter w;
  w.u8(reply.overlap ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(reply.lengths.size()));
  for (auto len : reply.lengths) w.u64(len);
  w.bytes(reply.data);
  return w.take();
}

GatherReply decode_gather_reply(ByteView payload) {
  WireReader r(payload);
  GatherReply reply;
  reply.overlap = r.u8() != 0;
  auto n = r.u32();
  if (n > r.remaining() / 8) raise(Errc::protocol, "gather reply count too large");
  reply.lengths.resize(n);
  for (auto& len : reply.lengths) len = r.u64();
  auto rest = r.rest();
  reply.data.assign(rest.begin(), rest.end());
  return reply;
}

Response RemoteIod::call(const Request& request) {
  ep_.send_request(node_, request);
  return ep_.await_response(node_);
}

void RemoteIod::create(std::uint64_t handle) { transport::check(call(make_request(Op::create, handle))); }

void RemoteIod::remove(std::uint64_t handle) { transport::check(call(make_request(Op::remove, handle))); }

SubFileStat RemoteIod::stat(std::uint64_t handle) {
  auto r = call(make_request(Op::stat, handle));
  transport::check(r);
  return decode_stat(r.payload);
}

void RemoteIod::flush(std::optional<std::uint64_t> handle) {
  transport::check(call(make_request(Op::flush, handle.value_or(kAllHandles))));
}

void RemoteIod::write(std::uint64_t handle, std::uint64_t offset, ByteView data) {
  transport::check(call(make_request(Op::write, handle, offset, 0, Bytes(data.begin(), data.end()))));
}

Bytes RemoteIod::read(std::uint64_t handle, std::uint64_t offset, std::uint64_t length) {
  auto r = call(make_request(Op::read, handle, offset, length));
  transport::check(r);
  return std::move(r.payload);
}

}  // namespace stripefs::iod
