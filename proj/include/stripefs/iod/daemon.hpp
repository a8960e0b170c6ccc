#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "stripefs/common/bytes.hpp"
#include "stripefs/iod/backing_store.hpp"
#include "stripefs/iod/page_cache.hpp"
#include "stripefs/iod/throttle.hpp"
#include "stripefs/layout/mapping.hpp"

namespace stripefs::iod {

struct DaemonConfig {
  CacheConfig cache;
  ThrottleModel throttle;
};

struct SubFileStat {
  std::uint64_t size = 0;
  std::uint64_t resident_bytes = 0;
  std::uint64_t dirty_bytes = 0;
  std::uint64_t cache_hit_bytes = 0;   // daemon-wide, cumulative
  std::uint64_t disk_read_bytes = 0;   // daemon-wide, cumulative
};

struct WriteResult {
  std::uint64_t accepted = 0;
  CacheCost cost;
};

struct ReadResult {
  Bytes data;
  ServedFrom served_from = ServedFrom::none;
  CacheCost cost;
};

enum class Direction : std::uint8_t { read = 0, write = 1 };

/// One requester's piece of a disk-directed operation. `data` is used for writes.
struct GatherRequest {
  std::uint32_t requester = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  Bytes data;
};

struct GatherResult {
  std::vector<Bytes> data;              // reads: one slice per request, request order
  std::vector<std::uint64_t> accepted;  // writes: bytes applied per request
  bool overlap = false;                 // writes: some requests overlapped
  std::vector<layout::SubExtent> plan;  // the coalesced access pass
  CacheCost cost;
};

/// An I/O daemon: one sparse sub-file per file handle behind a write-back cache.
class Daemon {
 public:
  /// Keeps a sub-file busy; remove() fails while any pin is alive.
  class Pin {
   public:
    Pin(Pin&& other) noexcept;
    Pin& operator=(Pin&&) = delete;
    ~Pin();

   private:
    friend class Daemon;
    Pin(Daemon* daemon, std::uint64_t handle) : daemon_(daemon), handle_(handle) {}
    Daemon* daemon_;
    std::uint64_t handle_;
  };

  Daemon(DaemonConfig config, std::unique_ptr<BackingStore> store, std::shared_ptr<Pacer> pacer = nullptr);

  const DaemonConfig& config() const noexcept { return config_; }

  void create(std::uint64_t handle);
  void remove(std::uint64_t handle);
  SubFileStat stat(std::uint64_t handle) const;
  bool exists(std::uint64_t handle) const;
  Pin pin(std::uint64_t handle);

  WriteResult handle_write(std::uint64_t handle, std::uint64_t offset, ByteView data);
  ReadResult handle_read(std::uint64_t handle, std::uint64_t offset, std::uint64_t length);

  /// Flushes one sub-file, or all of them when handle is empty.
  FlushReport flush_dirty(std::optional<std::uint64_t> handle);

  /// Coalesces all requests into one sorted pass over the sub-file. Overlapping
  /// writes resolve in request order, so the last request wins.
  GatherResult disk_directed_serve(std::uint64_t handle, std::span<const GatherRequest> requests, Direction dir);

  std::uint64_t dirty_bytes() const;
  std::uint64_t resident_bytes() const;
  /// Cumulative bytes read from cache and from storage, all sub-files.
  std::pair<std::uint64_t, std::uint64_t> read_counters() const;

 private:
  void require(std::uint64_t handle) const;
  void pace(const CacheCost& cost);
  ReadResult read_locked(std::uint64_t handle, std::uint64_t offset, std::uint64_t length);
  WriteResult write_locked(std::uint64_t handle, std::uint64_t offset, ByteView data);

  DaemonConfig config_;
  std::unique_ptr<BackingStore> store_;
  std::shared_ptr<Pacer> pacer_;

  mutable std::mutex mu_;
  PageCache cache_;
  std::unordered_map<std::uint64_t, int> pins_;  // handle -> live pins
  std::uint64_t hit_bytes_ = 0;
  std::uint64_t disk_read_bytes_ = 0;
};

}  // namespace stripefs::iod
