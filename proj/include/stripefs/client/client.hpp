#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stripefs/common/bytes.hpp"
#include "stripefs/common/error.hpp"
#include "stripefs/iod/daemon.hpp"
#include "stripefs/layout/mapping.hpp"
#include "stripefs/metamgr/manager.hpp"
#include "stripefs/metamgr/protocol.hpp"
#include "stripefs/transport/endpoint.hpp"

namespace stripefs::client {

using transport::NodeId;

/// Refers to an open file of one Client. Closing invalidates every copy.
struct FileHandle {
  std::uint64_t session = 0;
};

/// A read or write that reached only some daemons. `completed` lists the
/// file ranges known to be done.
class PartialIoError : public Error {
 public:
  PartialIoError(const std::string& what, std::vector<layout::FileExtent> completed)
      : Error(Errc::partial_io, what), completed_(std::move(completed)) {}
  const std::vector<layout::FileExtent>& completed() const noexcept { return completed_; }

 private:
  std::vector<layout::FileExtent> completed_;
};

struct ClientOptions {
  /// Daemon requests are cut at this size in sub-file space.
  std::uint64_t request_size = 64 * 1024;
  /// Requests in flight per daemon before the client waits for a reply.
  std::size_t window = 16;
  std::chrono::milliseconds timeout = transport::Endpoint::kDefaultTimeout;
};

/// File access for one process. Not thread-safe: one caller at a time.
/// The client keeps no data; every byte lives on the daemons.
class Client {
 public:
  Client(transport::Transport& transport, NodeId self, NodeId manager, ClientOptions options = {});

  NodeId id() const noexcept { return endpoint_.id(); }
  transport::Endpoint& endpoint() noexcept { return endpoint_; }
  metamgr::RemoteManager& manager() noexcept { return manager_; }
  const ClientOptions& options() const noexcept { return options_; }

  FileHandle create(const std::string& path, const layout::Distribution& dist, const std::string& partition = {});
  FileHandle open(const std::string& path);
  void remove(const std::string& path);

  std::uint64_t write_at(FileHandle h, std::uint64_t offset, ByteView data);
  /// Returns fewer bytes than asked for at the end of the file or view.
  Bytes read_at(FileHandle h, std::uint64_t offset, std::uint64_t length);

  layout::View set_view(FileHandle h, layout::View view);
  const layout::View& view(FileHandle h) const;
  const metamgr::FileMeta& meta(FileHandle h) const;

  /// Reports the final logical size. A second close raises stale_handle.
  std::uint64_t close(FileHandle h);

  /// Pushes the file's dirty pages on every daemon to storage.
  void flush(FileHandle h);
  iod::SubFileStat daemon_stat(FileHandle h, std::size_t iod_index);

  // Building blocks for collective operations.

  /// File ranges behind view bytes [offset, offset + length).
  std::vector<layout::FileExtent> map_view(FileHandle h, std::uint64_t offset, std::uint64_t length) const;
  /// View bytes available from offset, capped at length. Asks the manager
  /// for the current size when the cached one falls short.
  std::uint64_t readable(FileHandle h, std::uint64_t offset, std::uint64_t length);
  /// Writes data, laid end to end, to the given file ranges.
  void write_extents(FileHandle h, std::span<const layout::FileExtent> extents, ByteView data);
  Bytes read_extents(FileHandle h, std::span<const layout::FileExtent> extents);
  /// Raises the file's recorded size to at least high_water.
  void note_size(FileHandle h, std::uint64_t high_water);

 private:
  struct Session {
    metamgr::FileMeta meta;
    layout::View view;
    std::uint64_t known_size = 0;  // max of manager's size and our own writes
  };

  // One daemon request: a sub-file range and where its bytes sit in the
  // caller's buffer and in the file.
  struct Piece {
    std::size_t iod_index = 0;
    std::uint64_t sub_offset = 0;
    std::uint64_t length = 0;
    std::uint64_t buffer_offset = 0;
    std::uint64_t file_offset = 0;
  };

  Session& session(FileHandle h);
  const Session& session(FileHandle h) const;
  FileHandle open_session(metamgr::FileMeta meta);
  std::vector<Piece> plan(const Session& s, std::span<const layout::FileExtent> extents) const;
  /// Issues every piece, keeping up to `window` in flight per daemon.
  void run_pieces(const Session& s, const std::vector<Piece>& pieces, bool write, ByteView src, MutableByteView dst);

  ClientOptions options_;
  transport::Endpoint endpoint_;
  metamgr::RemoteManager manager_;
  std::unordered_map<std::uint64_t, Session> sessions_;
  std::uint64_t next_session_ = 1;
};

}  // namespace stripefs::client
