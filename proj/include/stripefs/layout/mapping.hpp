#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stripefs/layout/distribution.hpp"
#include "stripefs/layout/view.hpp"

namespace stripefs::layout {

/// A byte range inside one daemon's sub-file.
struct SubExtent {
  std::uint32_t iod = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  std::uint64_t end() const noexcept { return offset + length; }
  bool operator==(const SubExtent&) const = default;
};

/// Placement of [offset, offset + length) in logical order. Consecutive
/// pieces on the same daemon that are also contiguous there are merged, so
/// the logical offset of piece i is offset plus the lengths before it.
/// Irregular distributions raise Errc::no_mapping past their coverage.
std::vector<SubExtent> logical_to_physical(std::uint64_t offset, std::uint64_t length, const Distribution& dist);

/// Inverse of logical_to_physical for a single byte.
std::uint64_t physical_to_logical(std::uint32_t iod, std::uint64_t sub_offset, const Distribution& dist);

/// File ranges behind view bytes [view_offset, view_offset + length), in view
/// order, adjacent ranges merged. Bounded views raise Errc::range when the
/// request runs past their end.
std::vector<FileExtent> view_to_file(const View& view, std::uint64_t view_offset, std::uint64_t length);

struct Coalesced {
  std::vector<SubExtent> extents;   // sorted by (iod, offset), disjoint, non-adjacent
  std::vector<SubExtent> overlaps;  // byte ranges covered by more than one input
};

Coalesced coalesce(std::span<const SubExtent> extents);

enum class Conformance { conforming, non_conforming };

/// A view conforms to a distribution when every maximal contiguous run of the
/// view inside [0, file_size) lies in a single physical extent. With
/// access_size > 0 runs are additionally cut at multiples of access_size in
/// view space, which is how a full view describes its access granularity.
Conformance match_layout(const View& view, const Distribution& dist, std::uint64_t file_size,
                         std::uint64_t access_size = 0);

/// Cuts an extent at multiples of chunk in sub-file offset space.
std::vector<SubExtent> split_at(const SubExtent& extent, std::uint64_t chunk);

}  // namespace stripefs::layout
