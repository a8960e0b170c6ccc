#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stripefs/layout/view.hpp"

namespace stripefs::bench {

/// Eigenmodes of a 4-d lattice stored back to back in one file. Within a
/// mode, elements run x fastest, then y, z and t, with the 12 spin-colour
/// components innermost, so one time-slice is a contiguous run.
struct EigenWorkload {
  std::array<std::uint64_t, 4> dims{16, 16, 16, 32};  // x, y, z, t
  std::uint64_t components = 12;
  std::uint64_t element_size = 16;
  std::uint32_t n_modes = 300;
  std::uint32_t n_procs = 32;
  /// Processes along z and t; 0 picks pt = gcd(n_procs, t) and pz = n_procs / pt.
  std::uint32_t pz = 0;
  std::uint32_t pt = 0;

  std::uint64_t vector_elements() const;
  std::uint64_t vector_bytes() const;
  std::uint64_t time_slice_bytes() const;
  std::uint64_t file_bytes() const;

  /// Returns the workload with the decomposition filled in; raises
  /// Errc::config when it does not divide the lattice.
  EigenWorkload resolved() const;

  /// File ranges holding rank's sub-lattice of one mode, in file order.
  std::vector<layout::FileExtent> rank_extents(std::uint32_t rank, std::uint32_t mode) const;
};

struct EigenOptions {
  std::uint32_t n_iods = 4;
  std::uint64_t seed = 1;
};

struct EigenResult {
  EigenWorkload workload;
  std::uint64_t stripe = 0;
  double write_seconds = 0.0;
  double read_seconds = 0.0;
  double write_bps = 0.0;
  double read_bps = 0.0;
  bool reassembled = false;
};

/// Writes every mode from seeded pseudo-random bytes, has each process read
/// its portion of every mode with offset reads, and checks that the portions
/// put back together give the original modes. The stripe is one time-slice.
/// Raises Errc::integrity on a mismatch.
EigenResult run_eigenmode(const EigenWorkload& workload, const EigenOptions& options = {});

}  // namespace stripefs::bench
