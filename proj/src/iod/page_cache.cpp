#include "stripefs/iod/page_cache.hpp"

#include <algorithm>

#include "stripefs/common/error.hpp"

namespace stripefs::iod {

void CacheConfig::validate() const {
  if (page_size == 0) raise(Errc::config, "page_size must be > 0");
  if (capacity < page_size) raise(Errc::config, "cache capacity must hold at least one page");
  if (!(dirty_threshold > 0.0 && dirty_threshold <= 1.0)) raise(Errc::config, "dirty_threshold must be in (0, 1]");
}

CacheCost& CacheCost::operator+=(const CacheCost& o) {
  cache_read += o.cache_read;
  cache_written += o.cache_written;
  disk_read_sequential += o.disk_read_sequential;
  disk_read_seek += o.disk_read_seek;
  disk_written += o.disk_written;
  flush_cycles += o.flush_cycles;
  return *this;
}

PageCache::PageCache(CacheConfig config, BackingStore* store) : config_(config), store_(store) {
  config_.validate();
}

void PageCache::touch(PageId page, Entry& entry) {
  const bool clean = !dirty_.contains(page);
  if (clean) clean_lru_.erase({entry.tick, page});
  entry.tick = ++tick_;
  if (clean) clean_lru_.insert({entry.tick, page});
}

void PageCache::mark_dirty(PageId page, Entry& entry) {
  if (dirty_.insert(page).second) clean_lru_.erase({entry.tick, page});
}

void PageCache::note_disk_read(PageId page, CacheCost& cost) {
  const std::uint64_t start = page.index * config_.page_size;
  if (head_ && head_->first == page.handle && head_->second == start) {
    cost.disk_read_sequential += config_.page_size;
  } else {
    cost.disk_read_seek += config_.page_size;
  }
  head_ = {page.handle, start + config_.page_size};
}

std::uint64_t PageCache::valid_length(PageId page) const {
  const std::uint64_t start = page.index * config_.page_size;
  const std::uint64_t size = this->size(page.handle);
  return size <= start ? 0 : std::min(config_.page_size, size - start);
}

void PageCache::make_room(CacheCost& cost) {
  while (pages_.size() >= config_.capacity_pages()) {
    if (clean_lru_.empty()) {
      std::vector<PageId> all(dirty_.begin(), dirty_.end());
      ++cost.flush_cycles;
      ++flush_cycles_;
      auto report = flush_pages(all, cost);
      if (!report.failed.empty()) raise(Errc::storage, "flush failed while making room");
    }
    auto victim = clean_lru_.begin()->second;
    clean_lru_.erase(clean_lru_.begin());
    pages_.erase(victim);
  }
}

PageCache::Entry& PageCache::load(PageId page, bool overwrite_whole, CacheCost& cost) {
  if (auto it = pages_.find(page); it != pages_.end()) {
    touch(page, it->second);
    return it->second;
  }
  make_room(cost);
  Entry entry;
  entry.tick = ++tick_;
  if (holds_data()) entry.data.assign(config_.page_size, 0);
  if (!overwrite_whole && on_disk_.contains(page)) {
    note_disk_read(page, cost);
    if (holds_data()) store_->read(page.handle, page.index * config_.page_size, entry.data);
  }
  clean_lru_.insert({entry.tick, page});
  return pages_.emplace(page, std::move(entry)).first->second;
}

FlushReport PageCache::flush_pages(const std::vector<PageId>& pages, CacheCost& cost) {
  FlushReport report;
  for (const auto& page : pages) {
    auto it = pages_.find(page);
    if (it == pages_.end()) continue;
    const std::uint64_t len = valid_length(page);
    const std::uint64_t start = page.index * config_.page_size;
    if (holds_data() && len > 0) {
      try {
        store_->write(page.handle, start, ByteView(it->second.data).first(len));
      } catch (const Error&) {
        report.failed.push_back(page);
        continue;
      }
    }
    cost.disk_written += len;
    report.bytes += len;
    dirty_.erase(page);
    clean_lru_.insert({it->second.tick, page});
    on_disk_.insert(page);
    head_ = {page.handle, start + len};
  }
  return report;
}

template <class Apply>
CacheCost PageCache::write_pages(std::uint64_t handle, std::uint64_t offset, std::uint64_t length, Apply&& apply) {
  CacheCost cost;
  const std::uint64_t ps = config_.page_size;
  std::uint64_t pos = 0;
  while (pos < length) {
    const std::uint64_t abs = offset + pos;
    const std::uint64_t within = abs % ps;
    const std::uint64_t take = std::min(ps - within, length - pos);
    const PageId page{handle, abs / ps};
    try {
      Entry& entry = load(page, within == 0 && take == ps, cost);
      apply(entry, within, pos, take);
      mark_dirty(page, entry);
    } catch (const Error& e) {
      throw StorageFailure(pos, e.what());
    }
    cost.cache_written += take;
    auto& size = sizes_[handle];
    size = std::max(size, abs + take);
    pos += take;

    if (static_cast<double>(dirty_bytes()) >= config_.flush_trigger()) {
      std::vector<PageId> all(dirty_.begin(), dirty_.end());
      ++cost.flush_cycles;
      ++flush_cycles_;
      auto report = flush_pages(all, cost);
      if (!report.failed.empty()) {
        throw StorageFailure(pos, "flush failed on " + std::to_string(report.failed.size()) + " page(s)");
      }
    }
  }
  return cost;
}

CacheCost PageCache::write(std::uint64_t handle, std::uint64_t offset, ByteView data) {
  return write_pages(handle, offset, data.size(), [&](Entry& entry, std::uint64_t within, std::uint64_t pos,
                                                      std::uint64_t take) {
    if (holds_data()) {
      std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(pos), take,
                  entry.data.begin() + static_cast<std::ptrdiff_t>(within));
    }
  });
}

CacheCost PageCache::write(std::uint64_t handle, std::uint64_t offset, std::uint64_t length) {
  if (holds_data()) raise(Errc::protocol, "data-holding cache needs write data");
  return write_pages(handle, offset, length, [](Entry&, std::uint64_t, std::uint64_t, std::uint64_t) {});
}

template <class Deliver>
CacheCost PageCache::read_pages(std::uint64_t handle, std::uint64_t offset, std::uint64_t length, ServedFrom* from,
                                Deliver&& deliver) {
  CacheCost cost;
  bool any_cache = false;
  bool any_disk = false;
  const std::uint64_t ps = config_.page_size;
  std::uint64_t pos = 0;
  while (pos < length) {
    const std::uint64_t abs = offset + pos;
    const std::uint64_t within = abs % ps;
    const std::uint64_t take = std::min(ps - within, length - pos);
    const PageId page{handle, abs / ps};
    if (auto it = pages_.find(page); it != pages_.end()) {
      touch(page, it->second);
      cost.cache_read += take;
      any_cache = true;
      deliver(&it->second, within, pos, take);
    } else if (on_disk_.contains(page)) {
      Entry& entry = load(page, false, cost);
      any_disk = true;
      deliver(&entry, within, pos, take);
    } else {
      deliver(nullptr, within, pos, take);
    }
    pos += take;
  }
  if (from != nullptr) {
    *from = any_cache ? (any_disk ? ServedFrom::mixed : ServedFrom::cache)
                      : (any_disk ? ServedFrom::disk : ServedFrom::none);
  }
  return cost;
}

CacheCost PageCache::read(std::uint64_t handle, std::uint64_t offset, MutableByteView out, ServedFrom* from) {
  return read_pages(handle, offset, out.size(), from,
                    [&](const Entry* entry, std::uint64_t within, std::uint64_t pos, std::uint64_t take) {
                      auto dst = out.begin() + static_cast<std::ptrdiff_t>(pos);
                      if (entry == nullptr || entry->data.empty()) {
                        std::fill_n(dst, take, 0);
                      } else {
                        std::copy_n(entry->data.begin() + static_cast<std::ptrdiff_t>(within), take, dst);
                      }
                    });
}

CacheCost PageCache::read(std::uint64_t handle, std::uint64_t offset, std::uint64_t length, ServedFrom* from) {
  return read_pages(handle, offset, length, from, [](const Entry*, std::uint64_t, std::uint64_t, std::uint64_t) {});
}

FlushReport PageCache::flush(std::optional<std::uint64_t> handle, CacheCost* cost) {
  std::vector<PageId> selected;
  for (const auto& page : dirty_) {
    if (!handle || page.handle == *handle) selected.push_back(page);
  }
  CacheCost local;
  auto report = flush_pages(selected, local);
  if (cost != nullptr) *cost += local;
  return report;
}

void PageCache::drop(std::uint64_t handle) {
  for (auto it = pages_.begin(); it != pages_.end();) {
    if (it->first.handle == handle) {
      clean_lru_.erase({it->second.tick, it->first});
      dirty_.erase(it->first);
      it = pages_.erase(it);
    } else {
      ++it;
    }
  }
  std::erase_if(on_disk_, [&](const PageId& p) { return p.handle == handle; });
  sizes_.erase(handle);
  if (head_ && head_->first == handle) head_.reset();
}

std::uint64_t PageCache::size(std::uint64_t handle) const {
  auto it = sizes_.find(handle);
  return it == sizes_.end() ? 0 : it->second;
}

void PageCache::set_size(std::uint64_t handle, std::uint64_t size) { sizes_[handle] = size; }

void PageCache::adopt(std::uint64_t handle, std::uint64_t persisted_size) {
  sizes_[handle] = persisted_size;
  const std::uint64_t pages = (persisted_size + config_.page_size - 1) / config_.page_size;
  for (std::uint64_t i = 0; i < pages; ++i) on_disk_.insert({handle, i});
}

std::uint64_t PageCache::resident_bytes(std::uint64_t handle) const {
  std::uint64_t n = 0;
  for (const auto& [page, _] : pages_) n += page.handle == handle;
  return n * config_.page_size;
}

std::uint64_t PageCache::dirty_bytes(std::uint64_t handle) const {
  std::uint64_t n = 0;
  for (const auto& page : dirty_) n += page.handle == handle;
  return n * config_.page_size;
}

}  // namespace stripefs::iod
