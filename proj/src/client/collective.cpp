#include "stripefs/client/collective.hpp"

#include <algorithm>
#include <map>

#include "stripefs/iod/protocol.hpp"

namespace stripefs::client {

using layout::FileExtent;

namespace {

// Peer messages between ranks. The handle field carries (tag << 32 | rank),
// the offset field the collective call id.
constexpr std::uint8_t kGatherUp = 20;
constexpr std::uint8_t kGatherDown = 21;
constexpr std::uint8_t kShuffle = 22;

constexpr std::uint8_t kTagExtents = 1;
constexpr std::uint8_t kTagVerdict = 2;
constexpr std::uint8_t kTagData = 3;

transport::Request peer_message(std::uint8_t opcode, std::uint8_t tag, std::uint32_t rank, std::uint64_t op,
                                Bytes payload) {
  transport::Request r;
  r.opcode = opcode;
  r.handle = (static_cast<std::uint64_t>(tag) << 32) | rank;
  r.offset = op;
  r.length = payload.size();
  r.payload = std::move(payload);
  return r;
}

void put_extents(WireWriter& w, std::span<const FileExtent> extents) {
  w.u32(static_cast<std::uint32_t>(extents.size()));
  for (const auto& e : extents) {
    w.u64(e.offset);
    w.u64(e.length);
  }
}

std::vector<FileExtent> get_extents(WireReader& r) {
  auto n = r.u32();
  if (n > r.remaining() / 16) raise(Errc::protocol, "extent list too long");
  std::vector<FileExtent> out(n);
  for (auto& e : out) {
    e.offset = r.u64();
    e.length = r.u64();
  }
  return out;
}

std::uint64_t total_length(std::span<const FileExtent> extents) {
  std::uint64_t n = 0;
  for (const auto& e : extents) n += e.length;
  return n;
}

// A rank's extents, tagged with where each one starts in the rank's buffer.
struct Placed {
  FileExtent extent;
  std::uint64_t buffer_offset;
};

std::vector<Placed> place(std::span<const FileExtent> extents) {
  std::vector<Placed> out;
  std::uint64_t pos = 0;
  for (const auto& e : extents) {
    if (e.length > 0) out.push_back({e, pos});
    pos += e.length;
  }
  return out;
}

std::vector<FileExtent> domains(const std::vector<std::vector<FileExtent>>& all, std::uint32_t p, std::uint64_t unit) {
  std::uint64_t lo = UINT64_MAX;
  std::uint64_t hi = 0;
  for (const auto& rank : all) {
    for (const auto& e : rank) {
      if (e.length == 0) continue;
      lo = std::min(lo, e.offset);
      hi = std::max(hi, e.end());
    }
  }
  std::vector<FileExtent> out(p);
  if (lo >= hi) return out;
  std::uint64_t base = lo;
  std::uint64_t chunk = (hi - lo + p - 1) / p;
  if (unit > 0) {
    base = lo / unit * unit;
    chunk = ((hi - base + p - 1) / p + unit - 1) / unit * unit;
  }
  for (std::uint32_t i = 0; i < p; ++i) {
    std::uint64_t a = std::max(lo, base + chunk * i);
    std::uint64_t b = std::min(hi, base + chunk * (i + 1));
    if (a < b) out[i] = {a, b - a};
  }
  return out;
}

std::optional<FileExtent> intersect(const FileExtent& a, const FileExtent& b) {
  auto lo = std::max(a.offset, b.offset);
  auto hi = std::min(a.end(), b.end());
  if (lo >= hi) return std::nullopt;
  return FileExtent{lo, hi - lo};
}

std::vector<FileExtent> union_of(std::vector<FileExtent> v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });
  std::vector<FileExtent> out;
  for (const auto& e : v) {
    if (e.length == 0) continue;
    if (!out.empty() && out.back().end() >= e.offset) {
      out.back().length = std::max(out.back().end(), e.end()) - out.back().offset;
    } else {
      out.push_back(e);
    }
  }
  return out;
}

// Pieces of file data with their file offsets.
struct Chunk {
  FileExtent extent;
  Bytes data;
};

Bytes encode_chunks(const std::vector<Chunk>& chunks) {
  WireWriter w;
  w.u32(static_cast<std::uint32_t>(chunks.size()));
  for (const auto& c : chunks) {
    w.u64(c.extent.offset);
    w.u64(c.extent.length);
  }
  for (const auto& c : chunks) w.bytes(c.data);
  return w.take();
}

std::vector<Chunk> decode_chunks(ByteView payload) {
  WireReader r(payload);
  auto extents = get_extents(r);
  std::vector<Chunk> out;
  for (const auto& e : extents) {
    auto data = r.bytes(e.length);
    out.push_back({e, Bytes(data.begin(), data.end())});
  }
  return out;
}

struct ExtentsVote {
  std::string error;
  std::vector<FileExtent> extents;
};

Bytes encode_vote(const ExtentsVote& v) {
  WireWriter w;
  w.str(v.error);
  put_extents(w, v.extents);
  return w.take();
}

ExtentsVote decode_vote(ByteView b) {
  WireReader r(b);
  ExtentsVote v;
  v.error = r.str();
  v.extents = get_extents(r);
  return v;
}

// Shares every rank's extents; raises everywhere if any rank failed to map.
std::vector<std::vector<FileExtent>> share_extents(CollectiveGroup& g, std::uint64_t op, const ExtentsVote& mine) {
  auto blobs = g.allgather(op, kTagExtents, encode_vote(mine));
  std::vector<std::vector<FileExtent>> all;
  for (std::uint32_t r = 0; r < blobs.size(); ++r) {
    auto v = decode_vote(blobs[r]);
    if (!v.error.empty()) raise(Errc::partial_io, "collective aborted: rank " + std::to_string(r) + ": " + v.error);
    all.push_back(std::move(v.extents));
  }
  return all;
}

// All-to-all: outgoing[r] goes to rank r; returns what each rank sent here.
std::vector<Bytes> exchange(CollectiveGroup& g, std::uint64_t op, std::vector<Bytes> outgoing) {
  auto& ep = g.client().endpoint();
  const auto me = g.rank();
  std::vector<Bytes> incoming(g.size());
  for (std::uint32_t r = 0; r < g.size(); ++r) {
    if (r == me) continue;
    ep.post(g.member(r), peer_message(kShuffle, kTagData, me, op, std::move(outgoing[r])));
  }
  incoming[me] = std::move(outgoing[me]);
  for (std::uint32_t got = 1; got < g.size(); ++got) {
    auto in = ep.next_request_matching(
        [op](const transport::Incoming& m) { return m.request.opcode == kShuffle && m.request.offset == op; },
        g.client().options().timeout);
    if (!in) raise(Errc::timeout, "collective aborted: shuffle timed out");
    auto from = static_cast<std::uint32_t>(in->request.handle & 0xffffffffu);
    if (from >= g.size()) raise(Errc::protocol, "shuffle from unknown rank");
    incoming[from] = std::move(in->request.payload);
  }
  return incoming;
}

std::uint64_t unit_for(const Client& c, FileHandle h, TwoPhaseAlign align) {
  return align == TwoPhaseAlign::stripe ? c.meta(h).dist.unit() : 0;
}

std::uint64_t two_phase_write(CollectiveGroup& g, FileHandle h, std::uint64_t offset, ByteView data,
                              const CollectiveOptions& opt) {
  auto& c = g.client();
  const auto op = g.next_op();
  ExtentsVote mine;
  try {
    mine.extents = c.map_view(h, offset, data.size());
  } catch (const Error& e) {
    mine.error = e.what();
  }
  auto all = share_extents(g, op, mine);
  auto doms = domains(all, g.size(), unit_for(c, h, opt.align));

  std::vector<Bytes> outgoing(g.size());
  auto placed = place(mine.extents);
  for (std::uint32_t a = 0; a < g.size(); ++a) {
    std::vector<Chunk> chunks;
    for (const auto& p : placed) {
      auto cut = intersect(p.extent, doms[a]);
      if (!cut) continue;
      auto from = data.begin() + static_cast<std::ptrdiff_t>(p.buffer_offset + (cut->offset - p.extent.offset));
      chunks.push_back({*cut, Bytes(from, from + static_cast<std::ptrdiff_t>(cut->length))});
    }
    outgoing[a] = encode_chunks(chunks);
  }
  auto incoming = exchange(g, op, std::move(outgoing));

  std::string error;
  try {
    // Apply in rank order so that the highest rank wins any overlap.
    std::vector<std::vector<Chunk>> by_rank;
    std::vector<FileExtent> covered;
    for (const auto& blob : incoming) {
      by_rank.push_back(decode_chunks(blob));
      for (const auto& ch : by_rank.back()) covered.push_back(ch.extent);
    }
    auto runs = union_of(std::move(covered));
    std::vector<std::uint64_t> run_pos;
    std::uint64_t total = 0;
    for (const auto& r : runs) {
      run_pos.push_back(total);
      total += r.length;
    }
    Bytes buffer(total);
    for (const auto& chunks : by_rank) {
      for (const auto& ch : chunks) {
        auto it = std::upper_bound(runs.begin(), runs.end(), ch.extent.offset,
                                   [](std::uint64_t off, const FileExtent& r) { return off < r.offset; });
        auto idx = static_cast<std::size_t>(it - runs.begin()) - 1;
        std::copy(ch.data.begin(), ch.data.end(),
                  buffer.begin() + static_cast<std::ptrdiff_t>(run_pos[idx] + ch.extent.offset - runs[idx].offset));
      }
    }
    c.write_extents(h, runs, buffer);
    std::uint64_t hw = 0;
    for (const auto& e : mine.extents) hw = std::max(hw, e.end());
    c.note_size(h, hw);
  } catch (const Error& e) {
    error = e.what();
  }
  g.agree(op, error);
  return data.size();
}

Bytes two_phase_read(CollectiveGroup& g, FileHandle h, std::uint64_t offset, std::uint64_t length,
                     const CollectiveOptions& opt) {
  auto& c = g.client();
  const auto op = g.next_op();
  ExtentsVote mine;
  try {
    mine.extents = c.map_view(h, offset, c.readable(h, offset, length));
  } catch (const Error& e) {
    mine.error = e.what();
  }
  auto all = share_extents(g, op, mine);
  auto doms = domains(all, g.size(), unit_for(c, h, opt.align));
  const auto& dom = doms[g.rank()];

  // Read the union of what anyone wants from this rank's domain.
  std::vector<FileExtent> wanted;
  for (const auto& rank : all) {
    for (const auto& e : rank) {
      if (auto cut = intersect(e, dom)) wanted.push_back(*cut);
    }
  }
  auto runs = union_of(std::move(wanted));
  Bytes data;
  std::string error;
  try {
    data = c.read_extents(h, runs);
  } catch (const Error& e) {
    error = e.what();
  }
  g.agree(op, error);

  std::vector<std::uint64_t> run_pos;
  std::uint64_t total = 0;
  for (const auto& r : runs) {
    run_pos.push_back(total);
    total += r.length;
  }
  std::vector<Bytes> outgoing(g.size());
  for (std::uint32_t r = 0; r < g.size(); ++r) {
    std::vector<Chunk> chunks;
    for (const auto& e : all[r]) {
      auto cut = intersect(e, dom);
      if (!cut) continue;
      auto it = std::upper_bound(runs.begin(), runs.end(), cut->offset,
                                 [](std::uint64_t off, const FileExtent& x) { return off < x.offset; });
      auto idx = static_cast<std::size_t>(it - runs.begin()) - 1;
      auto from = data.begin() + static_cast<std::ptrdiff_t>(run_pos[idx] + cut->offset - runs[idx].offset);
      chunks.push_back({*cut, Bytes(from, from + static_cast<std::ptrdiff_t>(cut->length))});
    }
    outgoing[r] = encode_chunks(chunks);
  }
  auto incoming = exchange(g, op, std::move(outgoing));

  auto placed = place(mine.extents);
  Bytes out(total_length(mine.extents));
  for (const auto& blob : incoming) {
    for (const auto& ch : decode_chunks(blob)) {
      for (const auto& p : placed) {
        if (ch.extent.offset < p.extent.offset || ch.extent.end() > p.extent.end()) continue;
        std::copy(ch.data.begin(), ch.data.end(),
                  out.begin() + static_cast<std::ptrdiff_t>(p.buffer_offset + ch.extent.offset - p.extent.offset));
        break;
      }
    }
  }
  return out;
}

// One GATHER part per daemon of the file, with this rank's sub-file ranges
// on that daemon in file order.
struct DirectedPlan {
  std::vector<iod::GatherPart> parts;
  std::vector<std::vector<std::uint64_t>> buffer_offsets;  // per daemon, per entry
};

DirectedPlan plan_directed(const metamgr::FileMeta& meta, std::span<const FileExtent> extents, std::uint32_t p,
                           std::uint32_t rank, iod::Direction dir, ByteView data) {
  DirectedPlan plan;
  plan.parts.resize(meta.iod_list.size());
  plan.buffer_offsets.resize(meta.iod_list.size());
  for (auto& part : plan.parts) {
    part.participants = p;
    part.rank = rank;
    part.direction = dir;
  }
  std::uint64_t pos = 0;
  for (const auto& e : extents) {
    if (e.length == 0) continue;
    for (const auto& sub : layout::logical_to_physical(e.offset, e.length, meta.dist)) {
      auto& part = plan.parts.at(sub.iod);
      part.entries.push_back({sub.offset, sub.length});
      plan.buffer_offsets[sub.iod].push_back(pos);
      if (dir == iod::Direction::write) {
        auto from = data.begin() + static_cast<std::ptrdiff_t>(pos);
        part.data.insert(part.data.end(), from, from + static_cast<std::ptrdiff_t>(sub.length));
      }
      pos += sub.length;
    }
  }
  return plan;
}

// Sends every part and collects the replies, by daemon index.
std::vector<iod::GatherReply> run_directed(Client& c, const metamgr::FileMeta& meta, std::uint64_t op,
                                           const DirectedPlan& plan, std::string& error) {
  auto& ep = c.endpoint();
  std::vector<bool> sent(meta.iod_list.size(), false);
  for (std::size_t k = 0; k < meta.iod_list.size(); ++k) {
    auto req = iod::make_request(iod::Op::gather, meta.handle, op, 0, iod::encode_gather(plan.parts[k]));
    try {
      ep.send_request(meta.iod_list[k], req);
      sent[k] = true;
    } catch (const Error& e) {
      if (error.empty()) error = e.what();
    }
  }
  std::vector<iod::GatherReply> replies(meta.iod_list.size());
  for (std::size_t k = 0; k < meta.iod_list.size(); ++k) {
    if (!sent[k]) continue;
    try {
      auto resp = ep.await_response(meta.iod_list[k], c.options().timeout);
      transport::check(resp);
      replies[k] = iod::decode_gather_reply(resp.payload);
    } catch (const Error& e) {
      if (error.empty()) error = transport::to_string(meta.iod_list[k]) + ": " + e.what();
    }
  }
  return replies;
}

std::uint64_t directed_write(CollectiveGroup& g, FileHandle h, std::uint64_t offset, ByteView data) {
  auto& c = g.client();
  const auto op = g.next_op();
  ExtentsVote mine;
  DirectedPlan plan;
  try {
    mine.extents = c.map_view(h, offset, data.size());
    plan = plan_directed(c.meta(h), mine.extents, g.size(), g.rank(), iod::Direction::write, data);
  } catch (const Error& e) {
    mine.error = e.what();
  }
  share_extents(g, op, mine);

  std::string error;
  run_directed(c, c.meta(h), op, plan, error);
  if (error.empty()) {
    try {
      std::uint64_t hw = 0;
      for (const auto& e : mine.extents) hw = std::max(hw, e.end());
      c.note_size(h, hw);
    } catch (const Error& e) {
      error = e.what();
    }
  }
  g.agree(op, error);
  return data.size();
}

Bytes directed_read(CollectiveGroup& g, FileHandle h, std::uint64_t offset, std::uint64_t length) {
  auto& c = g.client();
  const auto op = g.next_op();
  ExtentsVote mine;
  DirectedPlan plan;
  try {
    mine.extents = c.map_view(h, offset, c.readable(h, offset, length));
    plan = plan_directed(c.meta(h), mine.extents, g.size(), g.rank(), iod::Direction::read, {});
  } catch (const Error& e) {
    mine.error = e.what();
  }
  share_extents(g, op, mine);

  std::string error;
  auto replies = run_directed(c, c.meta(h), op, plan, error);
  Bytes out(total_length(mine.extents));
  if (error.empty()) {
    for (std::size_t k = 0; k < replies.size(); ++k) {
      const auto& reply = replies[k];
      if (reply.lengths.size() != plan.parts[k].entries.size()) {
        error = "gather reply does not match the request";
        break;
      }
      std::uint64_t pos = 0;
      for (std::size_t i = 0; i < reply.lengths.size(); ++i) {
        auto n = reply.lengths[i];
        if (n != plan.parts[k].entries[i].length || pos + n > reply.data.size()) {
          error = "short gather reply";
          break;
        }
        std::copy_n(reply.data.begin() + static_cast<std::ptrdiff_t>(pos), n,
                    out.begin() + static_cast<std::ptrdiff_t>(plan.buffer_offsets[k][i]));
        pos += n;
      }
    }
  }
  g.agree(op, error);
  return out;
}

}  // namespace

CollectiveGroup::CollectiveGroup(Client& client, std::vector<NodeId> members, std::uint32_t rank)
    : client_(client), members_(std::move(members)), rank_(rank) {
  if (members_.empty()) raise(Errc::validation, "collective group needs at least one member");
  if (rank_ >= members_.size()) raise(Errc::validation, "rank outside the group");
  if (members_[rank_] != client_.id()) raise(Errc::validation, "group member list does not name this client");
}

std::uint64_t CollectiveGroup::next_op() { return (static_cast<std::uint64_t>(members_[0].value) << 32) | ++seq_; }

std::vector<Bytes> CollectiveGroup::allgather(std::uint64_t op, std::uint8_t tag, Bytes mine) {
  auto& ep = client_.endpoint();
  const auto timeout = client_.options().timeout;
  std::vector<Bytes> all(size());
  if (size() == 1) {
    all[0] = std::move(mine);
    return all;
  }
  if (rank_ != 0) {
    ep.post(members_[0], peer_message(kGatherUp, tag, rank_, op, std::move(mine)));
    auto in = ep.next_request_matching(
        [op, tag](const transport::Incoming& m) {
          return m.request.opcode == kGatherDown && m.request.offset == op && (m.request.handle >> 32) == tag;
        },
        timeout);
    if (!in) raise(Errc::timeout, "collective aborted: no reply from the coordinator");
    WireReader r(in->request.payload);
    for (auto& blob : all) {
      auto n = r.u64();
      auto b = r.bytes(n);
      blob.assign(b.begin(), b.end());
    }
    return all;
  }

  all[0] = std::move(mine);
  for (std::uint32_t got = 1; got < size(); ++got) {
    auto in = ep.next_request_matching(
        [op, tag](const transport::Incoming& m) {
          return m.request.opcode == kGatherUp && m.request.offset == op && (m.request.handle >> 32) == tag;
        },
        timeout);
    if (!in) raise(Errc::timeout, "collective aborted: rank missing");
    auto from = static_cast<std::uint32_t>(in->request.handle & 0xffffffffu);
    if (from == 0 || from >= size()) raise(Errc::protocol, "collective message from unknown rank");
    all[from] = std::move(in->request.payload);
  }
  WireWriter w;
  for (const auto& blob : all) {
    w.u64(blob.size());
    w.bytes(blob);
  }
  Bytes table = w.take();
  for (std::uint32_t r = 1; r < size(); ++r) ep.post(members_[r], peer_message(kGatherDown, tag, 0, op, table));
  return all;
}

void CollectiveGroup::agree(std::uint64_t op, const std::string& local_error) {
  WireWriter w;
  w.str(local_error);
  auto blobs = allgather(op, kTagVerdict, w.take());
  for (std::uint32_t r = 0; r < blobs.size(); ++r) {
    WireReader rd(blobs[r]);
    auto err = rd.str();
    if (!err.empty()) raise(Errc::partial_io, "collective aborted: rank " + std::to_string(r) + ": " + err);
  }
}

void CollectiveGroup::barrier() { agree(next_op(), {}); }

std::uint64_t collective_write(CollectiveGroup& group, FileHandle h, std::uint64_t offset, ByteView data,
                               const CollectiveOptions& options) {
  switch (options.mode) {
    case CollectiveMode::independent: {
      std::string error;
      try {
        group.client().write_at(h, offset, data);
      } catch (const Error& e) {
        error = e.what();
      }
      group.agree(group.next_op(), error);
      return data.size();
    }
    case CollectiveMode::two_phase:
      return two_phase_write(group, h, offset, data, options);
    case CollectiveMode::disk_directed:
      return directed_write(group, h, offset, data);
  }
  return 0;
}

Bytes collective_read(CollectiveGroup& group, FileHandle h, std::uint64_t offset, std::uint64_t length,
                      const CollectiveOptions& options) {
  switch (options.mode) {
    case CollectiveMode::independent: {
      std::string error;
      Bytes out;
      try {
        out = group.client().read_at(h, offset, length);
      } catch (const Error& e) {
        error = e.what();
      }
      group.agree(group.next_op(), error);
      return out;
    }
    case CollectiveMode::two_phase:
      return two_phase_read(group, h, offset, length, options);
    case CollectiveMode::disk_directed:
      return directed_read(group, h, offset, length);
  }
  return {};
}

}  // namespace stripefs::client
