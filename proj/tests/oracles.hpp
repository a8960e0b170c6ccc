#pragma once
// Brute-force reference models. They work one byte at a time straight from
// the definitions and share no code with the library.

#include <algorithm>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "stripefs/common/bytes.hpp"
#include "stripefs/layout/distribution.hpp"
#include "stripefs/layout/mapping.hpp"
#include "stripefs/layout/view.hpp"

namespace oracle {

using stripefs::Bytes;
using stripefs::layout::FileExtent;
using stripefs::layout::SubExtent;

struct BytePlace {
  std::uint32_t iod;
  std::uint64_t sub;
};

// Where logical byte b lives under a round-robin rule.
inline BytePlace place(std::uint64_t b, std::uint64_t stripe, std::uint32_t n, std::uint32_t base) {
  const std::uint64_t k = b / stripe;
  return {static_cast<std::uint32_t>((k + base) % n), (k / n) * stripe + b % stripe};
}

inline BytePlace place(std::uint64_t b, const stripefs::layout::Distribution& dist) {
  using namespace stripefs::layout;
  if (auto* s = std::get_if<StripeSpec>(&dist.rule())) return place(b, s->stripe_size, s->n_iods, s->base_iod);
  if (auto* c = std::get_if<BlockCyclic>(&dist.rule())) return place(b, c->block, c->n_iods, 0);
  // Irregular: walk the extents, counting what each iod already holds.
  const auto& irr = std::get<Irregular>(dist.rule());
  std::vector<std::uint64_t> held(64, 0);
  std::uint64_t logical = 0;
  for (const auto& e : irr.extents) {
    if (held.size() <= e.iod) held.resize(e.iod + 1, 0);
    if (b < logical + e.length) return {e.iod, held[e.iod] + (b - logical)};
    held[e.iod] += e.length;
    logical += e.length;
  }
  return {~0u, 0};
}

inline std::vector<SubExtent> map_bytes(std::uint64_t offset, std::uint64_t length,
                                        const stripefs::layout::Distribution& dist) {
  using namespace stripefs::layout;
  std::uint64_t unit = 0;
  std::uint32_t n = 1, base = 0;
  if (auto* s = std::get_if<StripeSpec>(&dist.rule())) {
    unit = s->stripe_size, n = s->n_iods, base = s->base_iod;
  } else if (auto* c = std::get_if<BlockCyclic>(&dist.rule())) {
    unit = c->block, n = c->n_iods;
  }
  std::vector<SubExtent> out;
  for (std::uint64_t b = offset; b < offset + length; ++b) {
    auto p = unit ? place(b, unit, n, base) : place(b, dist);
    if (!out.empty() && out.back().iod == p.iod && out.back().offset + out.back().length == p.sub) {
      ++out.back().length;
    } else {
      out.push_back({p.iod, p.sub, 1});
    }
  }
  return out;
}

// File byte behind view byte v, from the view definitions.
inline std::uint64_t view_byte(const stripefs::layout::View& view, std::uint64_t v) {
  using namespace stripefs::layout;
  if (view.is_full()) return v;
  if (auto* bc = std::get_if<BlockCyclicView>(&view.shape())) {
    return bc->first_offset + (v / bc->block) * bc->stride + v % bc->block;
  }
  for (const auto& e : std::get<ExtentListView>(view.shape()).extents) {
    if (v < e.length) return e.offset + v;
    v -= e.length;
  }
  return ~0ull;
}

inline std::vector<FileExtent> view_bytes(const stripefs::layout::View& view, std::uint64_t off, std::uint64_t len) {
  std::vector<FileExtent> out;
  for (std::uint64_t v = off; v < off + len; ++v) {
    auto f = view_byte(view, v);
    if (!out.empty() && out.back().offset + out.back().length == f) {
      ++out.back().length;
    } else {
      out.push_back({f, 1});
    }
  }
  return out;
}

// A file as one flat array; unwritten bytes read as zero.
class FlatFile {
 public:
  void write(std::uint64_t off, stripefs::ByteView data) {
    if (bytes_.size() < off + data.size()) bytes_.resize(off + data.size(), 0);
    std::copy(data.begin(), data.end(), bytes_.begin() + static_cast<std::ptrdiff_t>(off));
  }
  Bytes read(std::uint64_t off, std::uint64_t len) const {
    if (off >= bytes_.size()) return {};
    len = std::min<std::uint64_t>(len, bytes_.size() - off);
    return Bytes(bytes_.begin() + static_cast<std::ptrdiff_t>(off),
                 bytes_.begin() + static_cast<std::ptrdiff_t>(off + len));
  }
  // Through a view: the bytes behind view range [off, off + len), stopping at
  // the first one past the end of the file.
  void write_view(const stripefs::layout::View& view, std::uint64_t off, stripefs::ByteView data) {
    for (std::uint64_t i = 0; i < data.size(); ++i) write(view_byte(view, off + i), data.subspan(i, 1));
  }
  Bytes read_view(const stripefs::layout::View& view, std::uint64_t off, std::uint64_t len) const {
    Bytes out;
    for (std::uint64_t i = 0; i < len; ++i) {
      auto f = view_byte(view, off + i);
      if (f >= bytes_.size()) break;
      out.push_back(bytes_[f]);
    }
    return out;
  }
  std::uint64_t size() const { return bytes_.size(); }
  const Bytes& bytes() const { return bytes_; }

 private:
  Bytes bytes_;
};

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

inline std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

}  // namespace oracle
