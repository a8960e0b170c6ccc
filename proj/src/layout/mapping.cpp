#include "stripefs/layout/mapping.hpp"

#include <algorithm>
#include <optional>

#include "stripefs/common/error.hpp"

namespace stripefs::layout {

namespace {

std::optional<StripeSpec> as_stripes(const Distribution& dist) {
  if (auto* s = std::get_if<StripeSpec>(&dist.rule())) return *s;
  if (auto* b = std::get_if<BlockCyclic>(&dist.rule())) return StripeSpec{b->block, b->n_iods, 0};
  return std::nullopt;
}

void append_merged(std::vector<SubExtent>& out, const SubExtent& piece) {
  if (!out.empty() && out.back().iod == piece.iod && out.back().end() == piece.offset) {
    out.back().length += piece.length;
  } else {
    out.push_back(piece);
  }
}

void append_merged(std::vector<FileExtent>& out, const FileExtent& piece) {
  if (!out.empty() && out.back().end() == piece.offset) {
    out.back().length += piece.length;
  } else {
    out.push_back(piece);
  }
}

// Start of each irregular extent in logical and sub-file space.
struct IrregularIndex {
  struct Entry {
    std::uint64_t logical;
    std::uint64_t sub;
    std::uint32_t iod;
    std::uint64_t length;
  };
  std::vector<Entry> entries;
  std::uint64_t total = 0;

  explicit IrregularIndex(const Irregular& irr) {
    std::vector<std::uint64_t> next_sub;
    for (const auto& e : irr.extents) {
      if (next_sub.size() <= e.iod) next_sub.resize(e.iod + 1, 0);
      entries.push_back({total, next_sub[e.iod], e.iod, e.length});
      next_sub[e.iod] += e.length;
      total += e.length;
    }
  }
};

}  // namespace

std::vector<SubExtent> logical_to_physical(std::uint64_t offset, std::uint64_t length, const Distribution& dist) {
  dist.validate();
  std::vector<SubExtent> out;
  if (length == 0) return out;

  if (auto spec = as_stripes(dist)) {
    const std::uint64_t s = spec->stripe_size;
    const std::uint64_t n = spec->n_iods;
    if (n == 1) {
      out.push_back({0, offset, length});
      return out;
    }
    std::uint64_t pos = offset;
    const std::uint64_t end = offset + length;
    while (pos < end) {
      const std::uint64_t stripe = pos / s;
      const std::uint64_t in_stripe = pos % s;
      const std::uint64_t take = std::min(s - in_stripe, end - pos);
      const auto iod = static_cast<std::uint32_t>((stripe + spec->base_iod) % n);
      append_merged(out, {iod, (stripe / n) * s + in_stripe, take});
      pos += take;
    }
    return out;
  }

  IrregularIndex index(std::get<Irregular>(dist.rule()));
  if (offset + length > index.total) {
    raise(Errc::no_mapping, "range ends at " + std::to_string(offset + length) + " past irregular coverage " +
                                std::to_string(index.total));
  }
  auto it = std::upper_bound(index.entries.begin(), index.entries.end(), offset,
                             [](std::uint64_t v, const IrregularIndex::Entry& e) { return v < e.logical; });
  --it;
  std::uint64_t pos = offset;
  const std::uint64_t end = offset + length;
  for (; pos < end; ++it) {
    const std::uint64_t within = pos - it->logical;
    const std::uint64_t take = std::min(it->length - within, end - pos);
    append_merged(out, {it->iod, it->sub + within, take});
    pos += take;
  }
  return out;
}

std::uint64_t physical_to_logical(std::uint32_t iod, std::uint64_t sub_offset, const Distribution& dist) {
  dist.validate();
  if (auto spec = as_stripes(dist)) {
    if (iod >= spec->n_iods) raise(Errc::no_mapping, "iod " + std::to_string(iod) + " not in distribution");
    const std::uint64_t s = spec->stripe_size;
    const std::uint64_t n = spec->n_iods;
    const std::uint64_t rotation = (iod + n - spec->base_iod) % n;
    const std::uint64_t stripe = (sub_offset / s) * n + rotation;
    return stripe * s + sub_offset % s;
  }
  IrregularIndex index(std::get<Irregular>(dist.rule()));
  for (const auto& e : index.entries) {
    if (e.iod == iod && sub_offset >= e.sub && sub_offset < e.sub + e.length) {
      return e.logical + (sub_offset - e.sub);
    }
  }
  raise(Errc::no_mapping,
        "iod " + std::to_string(iod) + " offset " + std::to_string(sub_offset) + " holds no file data");
}

std::vector<FileExtent> view_to_file(const View& view, std::uint64_t view_offset, std::uint64_t length) {
  view.validate();
  std::vector<FileExtent> out;
  if (length == 0) return out;

  if (view.is_full()) {
    out.push_back({view_offset, length});
    return out;
  }
  if (auto* bc = std::get_if<BlockCyclicView>(&view.shape())) {
    std::uint64_t v = view_offset;
    const std::uint64_t end = view_offset + length;
    while (v < end) {
      const std::uint64_t block = v / bc->block;
      const std::uint64_t within = v % bc->block;
      const std::uint64_t take = std::min(bc->block - within, end - v);
      append_merged(out, {bc->first_offset + block * bc->stride + within, take});
      v += take;
    }
    return out;
  }

  const auto& list = std::get<ExtentListView>(view.shape()).extents;
  if (view_offset + length > view.size()) {
    raise(Errc::range, "view range ends at " + std::to_string(view_offset + length) + " past view size " +
                           std::to_string(view.size()));
  }
  std::uint64_t base = 0;
  std::uint64_t v = view_offset;
  const std::uint64_t end = view_offset + length;
  for (const auto& e : list) {
    if (v >= end) break;
    if (v < base + e.length) {
      const std::uint64_t within = v - base;
      const std::uint64_t take = std::min(e.length - within, end - v);
      append_merged(out, {e.offset + within, take});
      v += take;
    }
    base += e.length;
  }
  return out;
}

Coalesced coalesce(std::span<const SubExtent> extents) {
  std::vector<SubExtent> sorted;
  sorted.reserve(extents.size());
  for (const auto& e : extents) {
    if (e.length > 0) sorted.push_back(e);
  }
  std::sort(sorted.begin(), sorted.end(), [](const SubExtent& a, const SubExtent& b) {
    if (a.iod != b.iod) return a.iod < b.iod;
    if (a.offset != b.offset) return a.offset < b.offset;
    return a.length < b.length;
  });

  Coalesced result;
  for (const auto& e : sorted) {
    if (!result.extents.empty()) {
      auto& cur = result.extents.back();
      if (cur.iod == e.iod && e.offset <= cur.end()) {
        if (e.offset < cur.end()) {
          SubExtent overlap{e.iod, e.offset, std::min(cur.end(), e.end()) - e.offset};
          if (!result.overlaps.empty() && result.overlaps.back().iod == overlap.iod &&
              overlap.offset <= result.overlaps.back().end()) {
            auto& last = result.overlaps.back();
            last.length = std::max(last.end(), overlap.end()) - last.offset;
          } else {
            result.overlaps.push_back(overlap);
          }
        }
        cur.length = std::max(cur.end(), e.end()) - cur.offset;
        continue;
      }
    }
    result.extents.push_back(e);
  }
  return result;
}

Conformance match_layout(const View& view, const Distribution& dist, std::uint64_t file_size,
                         std::uint64_t access_size) {
  view.validate();
  const std::uint64_t view_len = view.length_within(file_size);
  std::vector<FileExtent> runs;
  if (access_size == 0) {
    runs = view_to_file(view, 0, view_len);
  } else {
    for (std::uint64_t v = 0; v < view_len; v += access_size) {
      for (const auto& r : view_to_file(view, v, std::min(access_size, view_len - v))) runs.push_back(r);
    }
  }
  for (const auto& run : runs) {
    if (dist.kind() == DistributionKind::irregular && run.end() > dist.coverage()) {
      return Conformance::non_conforming;
    }
    if (logical_to_physical(run.offset, run.length, dist).size() != 1) return Conformance::non_conforming;
  }
  return Conformance::conforming;
}

std::vector<SubExtent> split_at(const SubExtent& extent, std::uint64_t chunk) {
  std::vector<SubExtent> out;
  std::uint64_t pos = extent.offset;
  const std::uint64_t end = extent.end();
  while (pos < end) {
    const std::uint64_t take = std::min(chunk - pos % chunk, end - pos);
    out.push_back({extent.iod, pos, take});
    pos += take;
  }
  return out;
}

}  // namespace stripefs::layout
