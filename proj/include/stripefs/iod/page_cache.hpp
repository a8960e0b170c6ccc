#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stripefs/common/bytes.hpp"
#include "stripefs/iod/backing_store.hpp"

namespace stripefs::iod {

struct CacheConfig {
  std::uint64_t capacity = 256ull << 20;
  std::uint64_t page_size = 64ull << 10;
  double dirty_threshold = 0.40;

  void validate() const;
  std::uint64_t capacity_pages() const { return capacity / page_size; }
  /// Dirty volume at which a flush cycle starts.
  double flush_trigger() const { return dirty_threshold * static_cast<double>(capacity); }
};

/// Work done by one cache operation, in bytes per medium. A disk read counts
/// as sequential when it starts where the previous disk access ended.
struct CacheCost {
  std::uint64_t cache_read = 0;
  std::uint64_t cache_written = 0;
  std::uint64_t disk_read_sequential = 0;
  std::uint64_t disk_read_seek = 0;
  std::uint64_t disk_written = 0;
  std::uint32_t flush_cycles = 0;

  std::uint64_t disk_read() const { return disk_read_sequential + disk_read_seek; }
  CacheCost& operator+=(const CacheCost& o);
};

enum class ServedFrom : std::uint8_t { none, cache, disk, mixed };

struct PageId {
  std::uint64_t handle = 0;
  std::uint64_t index = 0;

  auto operator<=>(const PageId&) const = default;
};

struct PageIdHash {
  std::size_t operator()(const PageId& p) const noexcept {
    return std::hash<std::uint64_t>{}(p.handle * 0x9E3779B97F4A7C15ull ^ p.index);
  }
};

struct FlushReport {
  std::uint64_t bytes = 0;
  std::vector<PageId> failed;
};

/// Raised when the backing store fails under a write; `accepted` bytes of
/// the write made it into the cache before the failure.
class StorageFailure : public Error {
 public:
  StorageFailure(std::uint64_t accepted, const std::string& what)
      : Error(Errc::storage, what), accepted_(accepted) {}
  std::uint64_t accepted() const noexcept { return accepted_; }

 private:
  std::uint64_t accepted_;
};

/// Write-back page cache over a BackingStore.
///
/// Dirty pages are never evicted; clean pages go in LRU order. A write that
/// takes the dirty volume to the configured fraction of capacity flushes
/// every dirty page before returning; flushed pages stay resident and clean.
///
/// Constructed without a store, the cache tracks page state only and holds
/// no data; the timing model runs it that way.
class PageCache {
 public:
  explicit PageCache(CacheConfig config, BackingStore* store = nullptr);

  const CacheConfig& config() const noexcept { return config_; }
  bool holds_data() const noexcept { return store_ != nullptr; }

  CacheCost write(std::uint64_t handle, std::uint64_t offset, ByteView data);
  CacheCost write(std::uint64_t handle, std::uint64_t offset, std::uint64_t length);

  CacheCost read(std::uint64_t handle, std::uint64_t offset, MutableByteView out, ServedFrom* from = nullptr);
  CacheCost read(std::uint64_t handle, std::uint64_t offset, std::uint64_t length, ServedFrom* from = nullptr);

  /// Flushes one sub-file, or everything when handle is empty.
  FlushReport flush(std::optional<std::uint64_t> handle, CacheCost* cost = nullptr);

  /// Forgets every page of a sub-file, dirty ones included.
  void drop(std::uint64_t handle);

  /// Highest byte written + 1; reflects cached writes not yet flushed.
  std::uint64_t size(std::uint64_t handle) const;
  void set_size(std::uint64_t handle, std::uint64_t size);

  /// Registers a sub-file already present in the backing store.
  void adopt(std::uint64_t handle, std::uint64_t persisted_size);

  std::uint64_t dirty_bytes() const noexcept { return dirty_.size() * config_.page_size; }
  std::uint64_t resident_bytes() const noexcept { return pages_.size() * config_.page_size; }
  std::uint64_t resident_bytes(std::uint64_t handle) const;
  std::uint64_t dirty_bytes(std::uint64_t handle) const;
  bool resident(PageId page) const { return pages_.contains(page); }
  bool dirty(PageId page) const { return dirty_.contains(page); }
  std::uint64_t flush_cycles() const noexcept { return flush_cycles_; }

 private:
  struct Entry {
    std::uint64_t tick = 0;
    Bytes data;
  };

  template <class Apply>
  CacheCost write_pages(std::uint64_t handle, std::uint64_t offset, std::uint64_t length, Apply&& apply);
  template <class Deliver>
  CacheCost read_pages(std::uint64_t handle, std::uint64_t offset, std::uint64_t length, ServedFrom* from,
                       Deliver&& deliver);

  Entry& load(PageId page, bool overwrite_whole, CacheCost& cost);
  void make_room(CacheCost& cost);
  void touch(PageId page, Entry& entry);
  void mark_dirty(PageId page, Entry& entry);
  void note_disk_read(PageId page, CacheCost& cost);
  std::uint64_t valid_length(PageId page) const;
  FlushReport flush_pages(const std::vector<PageId>& pages, CacheCost& cost);

  CacheConfig config_;
  BackingStore* store_;
  std::uint64_t tick_ = 0;
  std::uint64_t flush_cycles_ = 0;

  std::unordered_map<PageId, Entry, PageIdHash> pages_;
  std::set<std::pair<std::uint64_t, PageId>> clean_lru_;
  std::set<PageId> dirty_;
  std::unordered_set<PageId, PageIdHash> on_disk_;
  std::unordered_map<std::uint64_t, std::uint64_t> sizes_;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> head_;  // (handle, byte) after last disk access
};

}  // namespace stripefs::iod
