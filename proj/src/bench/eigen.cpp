#include "stripefs/bench/eigen.hpp"

#include <chrono>
#include <numeric>
#include <thread>

#include "stripefs/bench/digest.hpp"
#include "stripefs/bench/stats.hpp"
#include "stripefs/client/local_cluster.hpp"
#include "stripefs/common/error.hpp"
#include "stripefs/layout/mapping.hpp"

namespace stripefs::bench {

std::uint64_t EigenWorkload::vector_elements() const {
  return components * dims[0] * dims[1] * dims[2] * dims[3];
}

std::uint64_t EigenWorkload::vector_bytes() const { return vector_elements() * element_size; }

std::uint64_t EigenWorkload::time_slice_bytes() const {
  return components * dims[0] * dims[1] * dims[2] * element_size;
}

std::uint64_t EigenWorkload::file_bytes() const { return n_modes * vector_bytes(); }

EigenWorkload EigenWorkload::resolved() const {
  EigenWorkload w = *this;
  for (auto d : dims) {
    if (d == 0) raise(Errc::config, "lattice dimensions must be positive");
  }
  if (components == 0 || element_size == 0 || n_procs == 0) raise(Errc::config, "empty eigen workload");
  if (w.pz == 0 && w.pt == 0) {
    w.pt = static_cast<std::uint32_t>(std::gcd<std::uint64_t>(n_procs, dims[3]));
    w.pz = n_procs / w.pt;
  }
  if (w.pz == 0 || w.pt == 0 || static_cast<std::uint64_t>(w.pz) * w.pt != n_procs) {
    raise(Errc::config, "decomposition must multiply to the process count");
  }
  if (dims[2] % w.pz != 0 || dims[3] % w.pt != 0) raise(Errc::config, "decomposition does not divide z and t");
  return w;
}

std::vector<layout::FileExtent> EigenWorkload::rank_extents(std::uint32_t rank, std::uint32_t mode) const {
  const auto w = resolved();
  const std::uint32_t iz = rank % w.pz;
  const std::uint32_t it = rank / w.pz;
  const std::uint64_t zc = dims[2] / w.pz;
  const std::uint64_t tc = dims[3] / w.pt;
  const std::uint64_t plane = components * dims[0] * dims[1] * element_size;  // one z-plane of one time-slice
  std::vector<layout::FileExtent> out;
  for (std::uint64_t t = it * tc; t < (it + 1) * tc; ++t) {
    const auto off = mode * vector_bytes() + t * time_slice_bytes() + iz * zc * plane;
    out.push_back({off, zc * plane});
  }
  return out;
}

EigenResult run_eigenmode(const EigenWorkload& workload, const EigenOptions& options) {
  const auto w = workload.resolved();
  EigenResult result;
  result.workload = w;
  result.stripe = w.time_slice_bytes();

  // One time-slice per stripe, so no slice is split between daemons.
  const layout::Distribution dist = layout::StripeSpec{result.stripe, options.n_iods, 0};
  for (std::uint64_t t = 0; t < w.dims[3]; ++t) {
    if (layout::logical_to_physical(t * result.stripe, result.stripe, dist).size() != 1) {
      raise(Errc::validation, "time-slice split across daemons");
    }
  }

  client::LocalClusterOptions opts;
  opts.n_iods = options.n_iods;
  client::LocalCluster cluster(opts);
  const std::string path = "/eigen/modes";
  {
    auto admin = cluster.make_client(w.n_procs);
    admin->close(admin->create(path, dist));
  }

  std::vector<std::unique_ptr<client::Client>> clients;
  for (std::uint32_t r = 0; r < w.n_procs; ++r) clients.push_back(cluster.make_client(r));

  // portions[rank][mode]: bytes the rank read, extent after extent
  std::vector<std::vector<Bytes>> portions(w.n_procs, std::vector<Bytes>(w.n_modes));
  std::vector<double> write_s(w.n_procs), read_s(w.n_procs);
  std::vector<std::string> errors(w.n_procs);
  std::vector<std::thread> threads;
  for (std::uint32_t r = 0; r < w.n_procs; ++r) {
    threads.emplace_back([&, r] {
      auto& c = *clients[r];
      try {
        auto h = c.open(path);
        c.manager().barrier(1, w.n_procs);
        auto t0 = std::chrono::steady_clock::now();
        for (std::uint32_t m = r; m < w.n_modes; m += w.n_procs) {
          c.write_at(h, m * w.vector_bytes(), pattern(options.seed, m, 0, w.vector_bytes()));
        }
        write_s[r] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        c.manager().barrier(2, w.n_procs);
        c.close(h);
        h = c.open(path);
        t0 = std::chrono::steady_clock::now();
        for (std::uint32_t m = 0; m < w.n_modes; ++m) {
          for (const auto& e : w.rank_extents(r, m)) {
            auto got = c.read_at(h, e.offset, e.length);
            portions[r][m].insert(portions[r][m].end(), got.begin(), got.end());
          }
        }
        read_s[r] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        c.close(h);
      } catch (const Error& e) {
        errors[r] = e.what();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (std::uint32_t r = 0; r < w.n_procs; ++r) {
    if (!errors[r].empty()) raise(Errc::unreachable, "rank " + std::to_string(r) + ": " + errors[r]);
  }

  // Put every mode back together from the portions and compare.
  for (std::uint32_t m = 0; m < w.n_modes; ++m) {
    Bytes mode(w.vector_bytes());
    for (std::uint32_t r = 0; r < w.n_procs; ++r) {
      std::uint64_t pos = 0;
      for (const auto& e : w.rank_extents(r, m)) {
        const auto& src = portions[r][m];
        if (pos + e.length > src.size()) raise(Errc::integrity, "short portion");
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(pos), e.length,
                    mode.begin() + static_cast<std::ptrdiff_t>(e.offset - m * w.vector_bytes()));
        pos += e.length;
      }
    }
    if (sha256(mode) != sha256(pattern(options.seed, m, 0, w.vector_bytes()))) {
      raise(Errc::integrity, "mode " + std::to_string(m) + " does not reassemble");
    }
  }
  result.reassembled = true;

  result.write_seconds = *std::max_element(write_s.begin(), write_s.end());
  result.read_seconds = *std::max_element(read_s.begin(), read_s.end());
  const double total = static_cast<double>(w.file_bytes());
  if (result.write_seconds > 0) result.write_bps = total / result.write_seconds;
  if (result.read_seconds > 0) result.read_bps = total / result.read_seconds;
  return result;
}

}  // namespace stripefs::bench
