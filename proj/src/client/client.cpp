#include "stripefs/client/client.hpp"

#include <algorithm>
#include <deque>

#include "stripefs/iod/protocol.hpp"

namespace stripefs::client {

namespace {

std::uint64_t high_water(std::span<const layout::FileExtent> extents) {
  std::uint64_t hw = 0;
  for (const auto& e : extents) {
    if (e.length > 0) hw = std::max(hw, e.end());
  }
  return hw;
}

std::vector<layout::FileExtent> merge(std::vector<layout::FileExtent> v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });
  std::vector<layout::FileExtent> out;
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

}  // namespace

Client::Client(transport::Transport& transport, NodeId self, NodeId manager, ClientOptions options)
    : options_(options), endpoint_(transport, self), manager_(endpoint_, manager) {
  if (options_.request_size == 0 || options_.window == 0) raise(Errc::config, "request size and window must be positive");
}

FileHandle Client::open_session(metamgr::FileMeta meta) {
  Session s;
  s.known_size = meta.logical_size;
  s.meta = std::move(meta);
  FileHandle h{next_session_++};
  sessions_.emplace(h.session, std::move(s));
  return h;
}

FileHandle Client::create(const std::string& path, const layout::Distribution& dist, const std::string& partition) {
  return open_session(manager_.create_file(path, dist, partition));
}

FileHandle Client::open(const std::string& path) { return open_session(manager_.open(path)); }

void Client::remove(const std::string& path) { manager_.remove(path); }

Client::Session& Client::session(FileHandle h) {
  auto it = sessions_.find(h.session);
  if (it == sessions_.end()) raise(Errc::stale_handle, "file handle is not open");
  return it->second;
}

const Client::Session& Client::session(FileHandle h) const {
  auto it = sessions_.find(h.session);
  if (it == sessions_.end()) raise(Errc::stale_handle, "file handle is not open");
  return it->second;
}

const metamgr::FileMeta& Client::meta(FileHandle h) const { return session(h).meta; }

const layout::View& Client::view(FileHandle h) const { return session(h).view; }

layout::View Client::set_view(FileHandle h, layout::View view) {
  auto& s = session(h);
  view.validate();
  return std::exchange(s.view, std::move(view));
}

std::uint64_t Client::close(FileHandle h) {
  auto& s = session(h);
  std::uint64_t size = s.known_size;
  if (s.known_size > s.meta.logical_size) size = manager_.update_size(s.meta.handle, s.known_size);
  sessions_.erase(h.session);
  return size;
}

void Client::note_size(FileHandle h, std::uint64_t hw) {
  auto& s = session(h);
  if (hw <= s.known_size) return;
  s.known_size = manager_.update_size(s.meta.handle, hw);
  s.meta.logical_size = s.known_size;
}

std::vector<layout::FileExtent> Client::map_view(FileHandle h, std::uint64_t offset, std::uint64_t length) const {
  return layout::view_to_file(session(h).view, offset, length);
}

std::uint64_t Client::readable(FileHandle h, std::uint64_t offset, std::uint64_t length) {
  auto& s = session(h);
  auto avail = [&] {
    auto n = s.view.length_within(s.known_size);
    return offset >= n ? 0 : std::min(length, n - offset);
  };
  if (avail() < length) {
    auto fresh = manager_.open(s.meta.path);
    if (fresh.handle == s.meta.handle) s.known_size = std::max(s.known_size, fresh.logical_size);
  }
  return avail();
}

std::vector<Client::Piece> Client::plan(const Session& s, std::span<const layout::FileExtent> extents) const {
  std::vector<Piece> pieces;
  std::uint64_t buffer_offset = 0;
  for (const auto& fe : extents) {
    if (fe.length == 0) continue;
    std::uint64_t file_offset = fe.offset;
    for (const auto& sub : layout::logical_to_physical(fe.offset, fe.length, s.meta.dist)) {
      for (const auto& part : layout::split_at(sub, options_.request_size)) {
        pieces.push_back({part.iod, part.offset, part.length, buffer_offset, file_offset});
        buffer_offset += part.length;
        file_offset += part.length;
      }
    }
  }
  return pieces;
}

void Client::run_pieces(const Session& s, const std::vector<Piece>& pieces, bool write, ByteView src,
                        MutableByteView dst) {
  const auto n_iods = s.meta.iod_list.size();
  std::vector<std::deque<std::size_t>> in_flight(n_iods);
  std::vector<bool> dead(n_iods, false);
  std::vector<layout::FileExtent> done;
  std::string first_error;

  auto fail = [&](const std::string& what) {
    if (first_error.empty()) first_error = what;
  };

  auto complete_one = [&](std::size_t k) {
    const auto& p = pieces[in_flight[k].front()];
    in_flight[k].pop_front();
    const NodeId node = s.meta.iod_list[k];
    try {
      auto resp = endpoint_.await_response(node, options_.timeout);
      if (resp.status != 0) {
        auto err = transport::remote_error(resp);
        if (write && err.code == Errc::storage && err.detail > 0) {
          done.push_back({p.file_offset, std::min(err.detail, p.length)});
        }
        fail(transport::to_string(node) + ": " + err.what);
        return;
      }
      if (!write) {
        if (resp.payload.size() != p.length) {
          fail(transport::to_string(node) + ": short read reply");
          return;
        }
        std::copy(resp.payload.begin(), resp.payload.end(), dst.begin() + static_cast<std::ptrdiff_t>(p.buffer_offset));
      }
      done.push_back({p.file_offset, p.length});
    } catch (const Error& e) {
      // Whatever is still queued for this daemon is lost with it.
      dead[k] = true;
      in_flight[k].clear();
      fail(transport::to_string(node) + ": " + e.what());
    }
  };

  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    const auto k = p.iod_index;
    if (k >= n_iods) raise(Errc::protocol, "extent maps past the file's daemon list");
    if (dead[k]) continue;
    while (in_flight[k].size() >= options_.window && !dead[k]) complete_one(k);
    if (dead[k]) continue;
    auto req = write ? iod::make_request(iod::Op::write, s.meta.handle, p.sub_offset, 0,
                                         Bytes(src.begin() + static_cast<std::ptrdiff_t>(p.buffer_offset),
                                               src.begin() + static_cast<std::ptrdiff_t>(p.buffer_offset + p.length)))
                     : iod::make_request(iod::Op::read, s.meta.handle, p.sub_offset, p.length);
    try {
      endpoint_.send_request(s.meta.iod_list[k], req);
      in_flight[k].push_back(i);
    } catch (const Error& e) {
      dead[k] = true;
      fail(transport::to_string(s.meta.iod_list[k]) + ": " + e.what());
    }
  }
  for (std::size_t k = 0; k < n_iods; ++k) {
    while (!in_flight[k].empty()) complete_one(k);
  }

  if (!first_error.empty()) {
    auto completed = merge(std::move(done));
    std::string what = std::string(write ? "partial write" : "partial read") + " of " + s.meta.path + ": " + first_error;
    throw PartialIoError(what, std::move(completed));
  }
}

void Client::write_extents(FileHandle h, std::span<const layout::FileExtent> extents, ByteView data) {
  auto& s = session(h);
  std::uint64_t total = 0;
  for (const auto& e : extents) total += e.length;
  if (total != data.size()) raise(Errc::validation, "extent lengths do not match the data");
  if (total == 0) return;
  auto pieces = plan(s, extents);
  run_pieces(s, pieces, true, data, {});
  note_size(h, high_water(extents));
}

Bytes Client::read_extents(FileHandle h, std::span<const layout::FileExtent> extents) {
  auto& s = session(h);
  std::uint64_t total = 0;
  for (const auto& e : extents) total += e.length;
  Bytes out(total);
  if (total == 0) return out;
  run_pieces(s, plan(s, extents), false, {}, out);
  return out;
}

std::uint64_t Client::write_at(FileHandle h, std::uint64_t offset, ByteView data) {
  if (data.empty()) {
    session(h);
    return 0;
  }
  auto extents = map_view(h, offset, data.size());
  write_extents(h, extents, data);
  return data.size();
}

Bytes Client::read_at(FileHandle h, std::uint64_t offset, std::uint64_t length) {
  auto n = readable(h, offset, length);
  if (n == 0) return {};
  return read_extents(h, map_view(h, offset, n));
}

void Client::flush(FileHandle h) {
  const auto& s = session(h);
  for (auto node : s.meta.iod_list) iod::RemoteIod(endpoint_, node).flush(s.meta.handle);
}

iod::SubFileStat Client::daemon_stat(FileHandle h, std::size_t iod_index) {
  const auto& s = session(h);
  if (iod_index >= s.meta.iod_list.size()) raise(Errc::range, "no such daemon in the file's list");
  return iod::RemoteIod(endpoint_, s.meta.iod_list[iod_index]).stat(s.meta.handle);
}

}  // namespace stripefs::client
