#include "stripefs/layout/distribution.hpp"

#include <algorithm>
#include <limits>

#include "stripefs/common/error.hpp"

namespace stripefs::layout {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::uint32_t Distribution::n_iods() const {
  return std::visit(overloaded{
                        [](const StripeSpec& s) { return s.n_iods; },
                        [](const BlockCyclic& b) { return b.n_iods; },
                        [](const Irregular& irr) {
                          std::uint32_t n = 0;
                          for (const auto& e : irr.extents) n = std::max(n, e.iod + 1);
                          return n;
                        },
                    },
                    rule_);
}

std::uint64_t Distribution::unit() const noexcept {
  if (auto* s = std::get_if<StripeSpec>(&rule_)) return s->stripe_size;
  if (auto* b = std::get_if<BlockCyclic>(&rule_)) return b->block;
  return 0;
}

std::uint64_t Distribution::coverage() const noexcept {
  auto* irr = std::get_if<Irregular>(&rule_);
  if (irr == nullptr) return std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 0;
  for (const auto& e : irr->extents) total += e.length;
  return total;
}

void Distribution::validate() const {
  std::visit(overloaded{
                 [](const StripeSpec& s) {
                   if (s.stripe_size == 0) raise(Errc::validation, "stripe_size must be >= 1");
                   if (s.n_iods == 0) raise(Errc::validation, "n_iods must be >= 1");
                   if (s.base_iod >= s.n_iods) raise(Errc::validation, "base_iod must be < n_iods");
                 },
                 [](const BlockCyclic& b) {
                   if (b.block == 0) raise(Errc::validation, "block must be >= 1");
                   if (b.n_iods == 0) raise(Errc::validation, "n_iods must be >= 1");
                 },
                 [](const Irregular& irr) {
                   if (irr.extents.empty()) raise(Errc::validation, "irregular distribution has no extents");
                   for (const auto& e : irr.extents) {
                     if (e.length == 0) raise(Errc::validation, "irregular extent of length 0");
                   }
                 },
             },
             rule_);
}

}  // namespace stripefs::layout
