#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "stripefs/client/client.hpp"

namespace stripefs::bench {

struct StageOptions {
  layout::Distribution dist = layout::StripeSpec{};
  std::uint64_t chunk = 1ull << 20;
  /// Rates for the modelled copy time; 0 leaves a side unbounded.
  double source_bps = 0.0;
  double network_bps = 0.0;
};

struct StageResult {
  std::uint64_t bytes = 0;
  std::string digest;  // SHA-256 of the source, hex
  double seconds = 0.0;
  /// Copy time if limited only by the slower of source and network.
  double modeled_seconds = 0.0;
};

/// Copies a local file into stripefs in sequential chunks, reads it back and
/// compares SHA-256 digests (Errc::integrity on mismatch). An existing
/// destination is replaced.
StageResult stage_copy(client::Client& client, const std::filesystem::path& src, const std::string& dst,
                       const StageOptions& options = {});

}  // namespace stripefs::bench
