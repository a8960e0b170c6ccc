#include "stripefs/layout/view.hpp"

#include <algorithm>
#include <limits>

#include "stripefs/common/error.hpp"

namespace stripefs::layout {

std::uint64_t View::size() const noexcept {
  if (auto* list = std::get_if<ExtentListView>(&shape_)) {
    std::uint64_t total = 0;
    for (const auto& e : list->extents) total += e.length;
    return total;
  }
  return std::numeric_limits<std::uint64_t>::max();
}

std::uint64_t View::length_within(std::uint64_t file_size) const noexcept {
  if (is_full()) return file_size;
  if (auto* bc = std::get_if<BlockCyclicView>(&shape_)) {
    if (file_size <= bc->first_offset) return 0;
    const std::uint64_t span = file_size - bc->first_offset;
    return (span / bc->stride) * bc->block + std::min(span % bc->stride, bc->block);
  }
  std::uint64_t total = 0;
  for (const auto& e : std::get<ExtentListView>(shape_).extents) {
    if (e.offset >= file_size) break;
    total += std::min(e.end(), file_size) - e.offset;
  }
  return total;
}

void View::validate() const {
  if (auto* bc = std::get_if<BlockCyclicView>(&shape_)) {
    if (bc->block == 0) raise(Errc::validation, "view block must be >= 1");
    if (bc->block > bc->stride) raise(Errc::validation, "view block must be <= stride");
    return;
  }
  if (auto* list = std::get_if<ExtentListView>(&shape_)) {
    for (std::size_t i = 0; i < list->extents.size(); ++i) {
      const auto& e = list->extents[i];
      if (e.length == 0) raise(Errc::validation, "view extent of length 0");
      if (i > 0 && e.offset < list->extents[i - 1].end()) {
        raise(Errc::validation, "view extents must be increasing and disjoint");
      }
    }
  }
}

}  // namespace stripefs::layout
