#pragma once

#include <cstdint>
#include <variant>
#include <vector>

namespace stripefs::layout {

inline constexpr std::uint64_t kDefaultStripeSize = 64 * 1024;

/// Round-robin striping: stripe k lives on iod (k + base_iod) mod n_iods.
struct StripeSpec {
  std::uint64_t stripe_size = kDefaultStripeSize;
  std::uint32_t n_iods = 1;
  std::uint32_t base_iod = 0;

  bool operator==(const StripeSpec&) const = default;
};

struct BlockCyclic {
  std::uint64_t block = kDefaultStripeSize;
  std::uint32_t n_iods = 1;

  bool operator==(const BlockCyclic&) const = default;
};

struct IrregularExtent {
  std::uint32_t iod = 0;
  std::uint64_t length = 0;

  bool operator==(const IrregularExtent&) const = default;
};

/// Explicit placement: extents cover [0, total) contiguously, in order.
struct Irregular {
  std::vector<IrregularExtent> extents;

  bool operator==(const Irregular&) const = default;
};

enum class DistributionKind : std::uint8_t { round_robin = 0, block_cyclic = 1, irregular = 2 };

/// Physical partitioning of a logical file over I/O daemons.
class Distribution {
 public:
  using Rule = std::variant<StripeSpec, BlockCyclic, Irregular>;

  Distribution() = default;
  Distribution(StripeSpec spec) : rule_(spec) {}
  Distribution(BlockCyclic bc) : rule_(bc) {}
  Distribution(Irregular irr) : rule_(std::move(irr)) {}

  static Distribution round_robin(std::uint64_t stripe_size, std::uint32_t n_iods, std::uint32_t base_iod = 0) {
    return StripeSpec{stripe_size, n_iods, base_iod};
  }

  DistributionKind kind() const noexcept { return static_cast<DistributionKind>(rule_.index()); }
  const Rule& rule() const noexcept { return rule_; }

  /// Number of daemons the file spans (highest used index + 1 for irregular).
  std::uint32_t n_iods() const;

  /// Stripe/block size for regular rules; 0 for irregular.
  std::uint64_t unit() const noexcept;

  /// Bytes covered by an irregular rule; UINT64_MAX for regular rules.
  std::uint64_t coverage() const noexcept;

  /// Raises Errc::validation when an invariant is violated.
  void validate() const;

  bool operator==(const Distribution&) const = default;

 private:
  Rule rule_ = StripeSpec{};
};

}  // namespace stripefs::layout
