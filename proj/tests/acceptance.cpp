// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "stripefs/bench/digest.hpp"
#include "stripefs/bench/eigen.hpp"
#include "stripefs/bench/stats.hpp"
#include "stripefs/bench/workload.hpp"
#include "stripefs/client/collective.hpp"
#include "stripefs/client/local_cluster.hpp"
#include "stripefs/transport/framing.hpp"
#include "stripefs/transport/sim_transport.hpp"
#include "stripefs/transport/socket_transport.hpp"

using namespace stripefs;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  const char* name;
  double limit_s;  // wall-clock limit; 0 means none
  std::function<Outcome()> run;
};

std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() /
           ("stripefs-accept-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. logical_to_physical against the byte mapper.

Outcome layout_oracle() {
  std::mt19937_64 rng(1001);
  const std::uint64_t stripes[] = {1, 4096, 65536};
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto stripe = stripes[rng() % 3];
    const auto n = static_cast<std::uint32_t>(oracle::uniform(rng, 1, 64));
    const layout::Distribution dist = layout::StripeSpec{stripe, n, static_cast<std::uint32_t>(rng() % n)};
    const auto offset = rng() % 2 ? oracle::uniform(rng, 0, 4 * stripe * n) : oracle::uniform(rng, 0, 1ull << 40);
    // Lengths span several stripes; a 1-byte stripe gives one extent per byte.
    const auto length = oracle::uniform(rng, 0, stripe == 1 ? 8192 : 4 * stripe);
    if (layout::logical_to_physical(offset, length, dist) != oracle::map_bytes(offset, length, dist)) ++mismatches;
  }
  return {mismatches == 0, fmt("10000 instances, %d mismatches", mismatches)};
}

// ---------------------------------------------------------------------------
// 2. Randomized schedules against a flat array.

layout::View random_view(std::mt19937_64& rng, std::uint64_t limit) {
  if (rng() % 2) {
    const auto block = oracle::uniform(rng, 1, 100000);
    const auto stride = block * oracle::uniform(rng, 1, 8);
    return layout::BlockCyclicView{oracle::uniform(rng, 0, limit / 4), block, stride};
  }
  layout::ExtentListView v;
  std::uint64_t at = oracle::uniform(rng, 0, limit / 4);
  for (int k = 0, n = static_cast<int>(oracle::uniform(rng, 1, 10)); k < n && at < limit; ++k) {
    const auto len = std::min(oracle::uniform(rng, 1, 300000), limit - at);
    v.extents.push_back({at, len});
    at += len + oracle::uniform(rng, 0, 200000);
  }
  return v;
}

Outcome round_trip() {
  constexpr std::uint64_t kMaxFile = 8ull << 20;
  client::LocalClusterOptions opts;
  opts.n_iods = 4;
  opts.daemon.cache.capacity = 4ull << 20;  // small enough that flushes and evictions happen
  client::LocalCluster cluster(opts);
  std::vector<std::unique_ptr<client::Client>> clients;
  for (std::uint32_t r = 0; r < 8; ++r) clients.push_back(cluster.make_client(r));

  std::mt19937_64 rng(2002);
  int bad = 0;
  std::uint64_t moved = 0;
  std::string first;
  for (int s = 0; s < 1000; ++s) {
    const auto procs = static_cast<std::uint32_t>(oracle::uniform(rng, 1, 8));
    const std::uint64_t stripes[] = {512, 4096, 65536, oracle::uniform(rng, 100, 200000)};
    const layout::Distribution dist =
        layout::StripeSpec{stripes[rng() % 4], static_cast<std::uint32_t>(oracle::uniform(rng, 1, 4)), 0};
    const std::string path = "/rt/" + std::to_string(s);
    std::vector<client::FileHandle> h(procs);
    h[0] = clients[0]->create(path, dist);
    for (std::uint32_t r = 1; r < procs; ++r) h[r] = clients[r]->open(path);
    oracle::FlatFile model;
    bool ok = true;
    auto note = [&](const std::string& what) {
      if (ok && first.empty()) first = "schedule " + std::to_string(s) + ": " + what;
      ok = false;
    };

    try {
      const int ops = static_cast<int>(oracle::uniform(rng, 3, 10));
      for (int k = 0; k < ops && ok; ++k) {
        const auto r = static_cast<std::uint32_t>(rng() % procs);
        auto& c = *clients[r];
        layout::View view = rng() % 2 ? random_view(rng, kMaxFile) : layout::View::full();
        c.set_view(h[r], view);
        const std::uint64_t room = view.bounded() ? view.size() : kMaxFile;
        const auto off = oracle::uniform(rng, 0, room / 2);
        if (rng() % 2) {
          auto len = rng() % 10 == 0 ? oracle::uniform(rng, 1, 2 << 20) : oracle::uniform(rng, 1, 256 << 10);
          len = std::min(len, room - off);
          while (len > 0 && oracle::view_byte(view, off + len - 1) >= kMaxFile) len /= 2;
          if (len == 0) continue;
          auto data = oracle::random_bytes(rng, len);
          c.write_at(h[r], off, data);
          model.write_view(view, off, data);
          moved += len;
        } else {
          const auto len = std::min(oracle::uniform(rng, 0, 512 << 10), room - off);
          if (c.read_at(h[r], off, len) != model.read_view(view, off, len)) note("read mismatch");
          moved += len;
        }
      }
      // Sometimes all ranks write interleaved blocks at once.
      if (ok && rng() % 3 == 0) {
        const auto block = oracle::uniform(rng, 1, 50000);
        const auto len = oracle::uniform(rng, 1, std::min<std::uint64_t>(kMaxFile / procs, 1 << 20));
        std::vector<Bytes> data(procs);
        for (std::uint32_t r = 0; r < procs; ++r) data[r] = oracle::random_bytes(rng, len);
        std::vector<std::thread> threads;
        std::vector<std::string> errors(procs);
        for (std::uint32_t r = 0; r < procs; ++r) {
          threads.emplace_back([&, r] {
            try {
              clients[r]->set_view(h[r], layout::BlockCyclicView{r * block, block, block * procs});
              clients[r]->write_at(h[r], 0, data[r]);
            } catch (const std::exception& e) {
              errors[r] = e.what();
            }
          });
        }
        for (auto& t : threads) t.join();
        for (std::uint32_t r = 0; r < procs; ++r) {
          if (!errors[r].empty()) note(errors[r]);
          model.write_view(layout::BlockCyclicView{r * block, block, block * procs}, 0, data[r]);
          moved += len;
        }
      }
      clients[0]->set_view(h[0], layout::View::full());
      if (ok && clients[0]->read_at(h[0], 0, model.size() + 4096) != model.bytes()) note("final contents differ");
      moved += model.size();
      for (std::uint32_t r = 0; r < procs; ++r) clients[r]->close(h[r]);
      clients[0]->remove(path);
    } catch (const std::exception& e) {
      note(e.what());
    }
    bad += ok ? 0 : 1;
  }
  return {bad == 0, fmt("1000 schedules, %d differing, %.1f MiB compared%s%s", bad,
                        static_cast<double>(moved) / (1 << 20), first.empty() ? "" : "; first: ", first.c_str())};
}

// ---------------------------------------------------------------------------
// 3. Write bandwidth against P with the sim profile, N = 32.

Outcome cache_knee() {
  bench::BenchConfig base;
  base.iods = 32;
  base.profile = bench::Profile::sim;
  base.repeats = 5;
  const auto daemon = base.daemon_config();
  const auto per_iod = bench::profile_params(bench::Profile::sim).per_iod_bytes;
  // Analytic knee: the first P whose per-daemon volume reaches the flush trigger.
  const auto trigger = std::ceil(daemon.cache.flush_trigger() / static_cast<double>(daemon.cache.page_size)) *
                       static_cast<double>(daemon.cache.page_size);
  const auto expected = static_cast<std::uint32_t>(std::ceil(trigger / static_cast<double>(per_iod)));

  std::map<std::uint32_t, double> per_iod_bw;
  for (std::uint32_t p = 8; p <= 64; ++p) {
    auto c = base;
    c.procs = p;
    auto r = bench::run_concurrent_rw(c);
    if (!r.verified) return {false, fmt("P=%u failed verification", p)};
    per_iod_bw[p] = r.write_bps / 32.0;
  }
  std::uint32_t knee = 0;
  for (std::uint32_t p = 9; p <= 64 && knee == 0; ++p) {
    if (per_iod_bw[p] < 0.5 * per_iod_bw[p - 1]) knee = p;
  }
  if (knee == 0) return {false, "no knee between P=8 and P=64"};
  double sum = 0;
  int n = 0;
  double lo = 1e300, hi = 0;
  for (std::uint32_t p = knee; p <= 64; ++p) {
    sum += per_iod_bw[p];
    ++n;
    lo = std::min(lo, per_iod_bw[p]);
    hi = std::max(hi, per_iod_bw[p]);
  }
  const double disk = daemon.throttle.disk_write_bps;
  const double mean = sum / n;
  const double at64 = per_iod_bw[64];
  const bool knee_ok = knee >= 50 && knee <= 52 && knee == expected;
  const bool level_ok = std::abs(mean - disk) <= 0.10 * disk && std::abs(at64 - disk) <= 0.10 * disk;
  return {knee_ok && level_ok,
          fmt("knee at P=%u (analytic %u); pre-knee %.1f MB/s per iod; post-knee per-iod mean %.2f MB/s, "
              "P=64 %.2f MB/s, range %.2f..%.2f, disk %.1f MB/s +-10%%",
              knee, expected, per_iod_bw[knee - 1] / 1e6, mean / 1e6, at64 / 1e6, lo / 1e6, hi / 1e6, disk / 1e6)};
}

// ---------------------------------------------------------------------------
// 4. Warm against cold reads.

Outcome warm_cold() {
  bench::BenchConfig c;
  c.procs = 16;
  c.iods = 4;
  c.profile = bench::Profile::sim;
  c.repeats = 5;
  auto warm = bench::run_concurrent_rw(c);
  auto cold = bench::run_cold_read(c);
  const double ratio = warm.read_bps / cold.read_bps;
  const bool ok = warm.verified && cold.verified && ratio >= 5.0 && cold.served_from_cache_pct == 0.0 &&
                  warm.served_from_cache_pct == 100.0;
  return {ok, fmt("warm %.1f MB/s (%.0f%% cache), cold %.1f MB/s (%.0f%% cache), ratio %.2f (need >= 5)",
                  warm.read_bps / 1e6, warm.served_from_cache_pct, cold.read_bps / 1e6, cold.served_from_cache_pct,
                  ratio)};
}

// ---------------------------------------------------------------------------
// 5. trim_mean against sorting.

Outcome trim_rule() {
  std::mt19937_64 rng(5005);
  std::uniform_real_distribution<double> u(0.0, 1e9);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> v(5);
    for (auto& x : v) x = u(rng);
    auto s = v;
    std::sort(s.begin(), s.end());
    const double want = (s[1] + s[2] + s[3]) / 3.0;
    if (bench::trim_mean(v) != want) ++bad;
  }
  return {bad == 0, fmt("10000 lists, %d inexact", bad)};
}

// ---------------------------------------------------------------------------
// 6. Stripe = S, P = N = 32.

Outcome large_stripe() {
  constexpr std::uint32_t kProcs = 32;
  bench::BenchConfig c;
  c.procs = kProcs;
  c.iods = kProcs;
  c.profile = bench::Profile::sim;
  c.repeats = 3;
  const auto s = c.bytes_per_proc();
  const layout::Distribution dist = layout::StripeSpec{s, kProcs, 0};
  std::set<std::uint32_t> used;
  bool ok = true;
  for (std::uint32_t r = 0; r < kProcs; ++r) {
    auto ext = layout::logical_to_physical(r * s, s, dist);
    ok = ok && ext.size() == 1 && ext[0].length == s && used.insert(ext[0].iod).second;
  }
  // The harness refuses the run if the mapping is not one-to-one.
  auto result = bench::run_large_stripe(c);
  ok = ok && result.verified;

  // With real bytes: every daemon ends up holding exactly one rank's data.
  const std::uint64_t small = 256 * 1024;
  client::LocalClusterOptions o;
  o.n_iods = kProcs;
  client::LocalCluster cluster(o);
  {
    auto admin = cluster.make_client(kProcs);
    admin->close(admin->create("/large", layout::StripeSpec{small, kProcs, 0}));
  }
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (std::uint32_t r = 0; r < kProcs; ++r) {
    threads.emplace_back([&, r] {
      try {
        auto c = cluster.make_client(r);
        auto h = c->open("/large");
        c->write_at(h, r * small, Bytes(small, static_cast<std::uint8_t>(r)));
        c->close(h);
      } catch (const std::exception&) {
        ++failures;
      }
    });
  }
  for (auto& t : threads) t.join();
  auto reader = cluster.make_client(kProcs + 1);
  auto h = reader->open("/large");
  std::uint32_t exact = 0;
  for (std::uint32_t i = 0; i < kProcs; ++i) {
    auto st = reader->daemon_stat(h, i);
    auto got = cluster.daemon(i).handle_read(reader->meta(h).handle, 0, small).data;
    if (st.size == small && got == Bytes(small, static_cast<std::uint8_t>(i))) ++exact;
  }
  ok = ok && failures == 0 && exact == kProcs;
  return {ok, fmt("S = %llu B: %zu distinct daemons, one extent each; real-bytes run: %u/%u daemons hold exactly "
                  "one rank's data",
                  static_cast<unsigned long long>(s), used.size(), exact, kProcs)};
}

// ---------------------------------------------------------------------------
// 7. Eigenmode geometry and a desk-scale run.

Outcome eigen() {
  bench::EigenWorkload full;
  full.dims = {16, 16, 16, 32};
  full.n_modes = 300;
  full.n_procs = 32;
  const bool geometry = full.vector_elements() == 1'572'864 && full.file_bytes() == 300ull * 1'572'864 * 16;

  bench::EigenWorkload desk;
  desk.dims = {4, 4, 4, 8};
  desk.n_modes = 20;
  desk.n_procs = 8;
  auto r = bench::run_eigenmode(desk);
  return {geometry && r.reassembled,
          fmt("vector length %llu, file %llu B (%.2f GB); desk run %llu B, reassembly %s",
              static_cast<unsigned long long>(full.vector_elements()),
              static_cast<unsigned long long>(full.file_bytes()), static_cast<double>(full.file_bytes()) / 1e9,
              static_cast<unsigned long long>(desk.file_bytes()), r.reassembled ? "identical" : "differs")};
}

// ---------------------------------------------------------------------------
// 8. Collective against independent.

Outcome collective() {
  client::LocalClusterOptions o;
  o.n_iods = 4;
  o.daemon.cache.capacity = 8ull << 20;
  client::LocalCluster cluster(o);
  std::vector<std::unique_ptr<client::Client>> clients;
  for (std::uint32_t r = 0; r < 8; ++r) clients.push_back(cluster.make_client(r));

  std::mt19937_64 rng(8008);
  int bad = 0;
  std::string first;
  for (int i = 0; i < 500; ++i) {
    const auto procs = static_cast<std::uint32_t>(oracle::uniform(rng, 1, 8));
    const auto bytes = rng() % 4 == 0 ? oracle::uniform(rng, 1, 1 << 20) : oracle::uniform(rng, 1, 128 << 10);
    const layout::Distribution dist = layout::StripeSpec{oracle::uniform(rng, 256, 128 << 10),
                                                         static_cast<std::uint32_t>(oracle::uniform(rng, 1, 4)), 0};
    // Views: interleaved blocks, possibly shifted so that ranks overlap.
    const auto block = oracle::uniform(rng, 1, 64 << 10);
    const auto shift = rng() % 3 == 0 ? oracle::uniform(rng, 1, block) : 0;
    const client::TwoPhaseAlign align = rng() % 2 ? client::TwoPhaseAlign::stripe : client::TwoPhaseAlign::naive;
    auto view_of = [&](std::uint32_t r) { return layout::BlockCyclicView{r * block + r * shift, block, block * procs}; };
    std::vector<Bytes> data(procs);
    for (auto& d : data) d = oracle::random_bytes(rng, bytes);

    const std::string base = "/coll/" + std::to_string(i);
    const std::string ind = base + "/ind", tp = base + "/tp", dd = base + "/dd";
    for (const auto& p : {ind, tp, dd}) clients[0]->close(clients[0]->create(p, dist));

    bool ok = true;
    auto note = [&](const std::string& what) {
      if (ok && first.empty()) first = "instance " + std::to_string(i) + ": " + what;
      ok = false;
    };
    // Independent reference: each rank in turn, so the highest rank lands last.
    for (std::uint32_t r = 0; r < procs; ++r) {
      auto h = clients[r]->open(ind);
      clients[r]->set_view(h, view_of(r));
      clients[r]->write_at(h, 0, data[r]);
      clients[r]->close(h);
    }
    std::vector<Bytes> ind_read(procs), tp_read(procs), dd_read(procs);
    for (std::uint32_t r = 0; r < procs; ++r) {
      auto h = clients[r]->open(ind);
      clients[r]->set_view(h, view_of(r));
      ind_read[r] = clients[r]->read_at(h, 0, bytes);
      clients[r]->close(h);
    }

    std::vector<transport::NodeId> members;
    for (std::uint32_t r = 0; r < procs; ++r) members.push_back(clients[r]->id());
    std::vector<std::string> errors(procs);
    std::vector<std::thread> threads;
    for (std::uint32_t r = 0; r < procs; ++r) {
      threads.emplace_back([&, r] {
        try {
          auto& c = *clients[r];
          client::CollectiveGroup g(c, members, r);
          auto h1 = c.open(tp);
          auto h2 = c.open(dd);
          c.set_view(h1, view_of(r));
          c.set_view(h2, view_of(r));
          client::collective_write(g, h1, 0, data[r], {client::CollectiveMode::two_phase, align});
          client::collective_write(g, h2, 0, data[r], {client::CollectiveMode::disk_directed, align});
          g.barrier();
          tp_read[r] = client::collective_read(g, h1, 0, bytes, {client::CollectiveMode::two_phase, align});
          dd_read[r] = client::collective_read(g, h2, 0, bytes, {client::CollectiveMode::disk_directed, align});
          c.close(h1);
          c.close(h2);
        } catch (const std::exception& e) {
          errors[r] = e.what();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (std::uint32_t r = 0; r < procs; ++r) {
      if (!errors[r].empty()) note("rank " + std::to_string(r) + ": " + errors[r]);
      if (ind_read[r] != tp_read[r]) note("two-phase read differs");
      if (ind_read[r] != dd_read[r]) note("disk-directed read differs");
    }
    // Whole files compared byte for byte.
    Bytes contents[3];
    int k = 0;
    for (const auto& p : {ind, tp, dd}) {
      auto h = clients[0]->open(p);
      contents[k++] = clients[0]->read_at(h, 0, std::uint64_t{1} << 40);
      clients[0]->close(h);
      clients[0]->remove(p);
    }
    if (contents[0] != contents[1]) note("two-phase file differs");
    if (contents[0] != contents[2]) note("disk-directed file differs");
    bad += ok ? 0 : 1;
  }
  return {bad == 0, fmt("500 instances, %d differing%s%s", bad, first.empty() ? "" : "; first: ", first.c_str())};
}

// ---------------------------------------------------------------------------
// 9. Manager restart from the journal.

Outcome durability() {
  auto dir = temp_dir("journal");
  std::mt19937_64 rng(9009);
  int bad = 0;
  std::size_t records = 0;
  for (int ns = 0; ns < 100; ++ns) {
    client::LocalClusterOptions o;
    o.n_iods = 4;
    o.journal_path = (dir / ("ns" + std::to_string(ns))).string();
    client::LocalCluster cluster(o);
    auto c = cluster.make_client(0);
    std::vector<std::string> live;
    auto step = [&] {
      const auto op = rng() % 10;
      if (op < 5 || live.empty()) {
        const std::string path = "/d" + std::to_string(rng() % 8) + "/f" + std::to_string(rng() % 1000);
        if (std::find(live.begin(), live.end(), path) != live.end()) return;
        layout::Distribution dist;
        switch (rng() % 3) {
          case 0:
            dist = layout::StripeSpec{oracle::uniform(rng, 1, 1 << 20), static_cast<std::uint32_t>(oracle::uniform(rng, 1, 4)), 0};
            break;
          case 1:
            dist = layout::BlockCyclic{oracle::uniform(rng, 1, 1 << 16), static_cast<std::uint32_t>(oracle::uniform(rng, 1, 4))};
            break;
          default:
            dist = layout::Irregular{{{static_cast<std::uint32_t>(rng() % 4), oracle::uniform(rng, 1 << 19, 1 << 20)},
                                      {static_cast<std::uint32_t>(rng() % 4), oracle::uniform(rng, 1 << 19, 1 << 20)}}};
        }
        auto h = c->create(path, dist);
        if (rng() % 2) c->write_at(h, oracle::uniform(rng, 0, 1 << 18), Bytes(oracle::uniform(rng, 1, 5000), 1));
        c->close(h);
        live.push_back(path);
      } else if (op < 8) {
        auto h = c->open(live[rng() % live.size()]);
        c->write_at(h, oracle::uniform(rng, 0, 1 << 18), Bytes(oracle::uniform(rng, 1, 5000), 2));
        c->close(h);
      } else {
        const auto k = rng() % live.size();
        c->remove(live[k]);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(k));
      }
    };
    const int ops = static_cast<int>(oracle::uniform(rng, 5, 40));
    bool ok = true;
    for (int i = 0; i < ops; ++i) {
      step();
      if (i == ops / 2 || i == ops - 1) {
        const auto before = cluster.manager().dump();
        cluster.restart_manager();
        ok = ok && cluster.manager().dump() == before;
      }
    }
    records += cluster.manager().list().size();
    bad += ok ? 0 : 1;
  }
  std::filesystem::remove_all(dir);
  return {bad == 0, fmt("100 namespaces, 2 restarts each, %zu files at the end, %d dumps differ", records, bad)};
}

// ---------------------------------------------------------------------------
// 10. Transport soak on both backends, and golden frames.

std::string soak(transport::Transport& t, std::uint32_t nodes, std::uint32_t messages) {
  using transport::NodeId;
  struct Seen {
    std::uint32_t src, dst, seq;
    std::array<std::uint8_t, 32> digest;
  };
  std::mutex mu;
  std::vector<Seen> seen;
  std::vector<transport::Registration> regs;
  for (std::uint32_t n = 0; n < nodes; ++n) {
    regs.push_back(t.register_receiver(NodeId{n}, [&, n](const transport::Datagram& d) {
      WireReader r(d.payload);
      Seen s{r.u32(), n, r.u32(), {}};
      s.digest = bench::sha256(r.rest());
      if (s.src != d.src.value) s.seq = ~0u;  // wrong source on delivery
      std::lock_guard lock(mu);
      seen.push_back(s);
    }));
  }
  // sent[src][dst] = digests in send order
  std::vector<std::vector<std::vector<std::array<std::uint8_t, 32>>>> sent(
      nodes, std::vector<std::vector<std::array<std::uint8_t, 32>>>(nodes));
  std::vector<std::thread> threads;
  const std::uint32_t per_sender = messages / nodes;
  for (std::uint32_t src = 0; src < nodes; ++src) {
    threads.emplace_back([&, src] {
      std::mt19937_64 rng(10000 + src);
      for (std::uint32_t i = 0; i < per_sender; ++i) {
        const auto dst = static_cast<std::uint32_t>(rng() % nodes);
        const auto len = rng() % 8 == 0 ? oracle::uniform(rng, 0, t.mtu() - 8) : oracle::uniform(rng, 0, 512);
        auto body = oracle::random_bytes(rng, len);
        WireWriter w;
        w.u32(src);
        w.u32(static_cast<std::uint32_t>(sent[src][dst].size()));
        w.bytes(body);
        sent[src][dst].push_back(bench::sha256(body));
        t.send(NodeId{src}, NodeId{dst}, w.take());
      }
    });
  }
  for (auto& th : threads) th.join();
  const std::size_t total = std::size_t{per_sender} * nodes;
  for (int i = 0; i < 3000; ++i) {
    {
      std::lock_guard lock(mu);
      if (seen.size() >= total) break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  regs.clear();
  std::lock_guard lock(mu);
  if (seen.size() != total) return fmt("%zu of %zu delivered", seen.size(), total);
  // In delivery order per pair: sequence numbers 0, 1, 2, ... with matching digests.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> next;
  for (const auto& s : seen) {
    if (s.seq == ~0u || s.src >= nodes) return "datagram credited to the wrong source";
    auto& n = next[{s.src, s.dst}];
    if (s.seq != n) return fmt("pair %u->%u: got #%u, expected #%u", s.src, s.dst, s.seq, n);
    if (sent[s.src][s.dst][n] != s.digest) return fmt("pair %u->%u: payload #%u altered", s.src, s.dst, n);
    ++n;
  }
  for (std::uint32_t a = 0; a < nodes; ++a) {
    for (std::uint32_t b = 0; b < nodes; ++b) {
      if (next[{a, b}] != sent[a][b].size()) return fmt("pair %u->%u incomplete", a, b);
    }
  }
  return {};
}

std::string golden_frames() {
  const Bytes want{0x46, 0x54, 0x53, 0x50, 0x02, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00,
                   0x03, 0x00, 0x00, 0x00, 0xAA, 0xBB, 0xCC};
  if (transport::encode_frame(transport::NodeId{2}, transport::NodeId{1}, Bytes{0xAA, 0xBB, 0xCC}) != want) {
    return "encode_frame differs from the fixture";
  }
  // The same frame as it crosses a real socket.
  int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  ::listen(lfd, 1);
  socklen_t len = sizeof(addr);
  ::getsockname(lfd, reinterpret_cast<sockaddr*>(&addr), &len);
  std::vector<transport::SocketNode> table(3, transport::SocketNode{"127.0.0.1", 0});
  table[1].port = ntohs(addr.sin_port);
  transport::SocketTransport t(table);
  t.send(transport::NodeId{2}, transport::NodeId{1}, Bytes{0xAA, 0xBB, 0xCC});
  int fd = ::accept(lfd, nullptr, nullptr);
  Bytes wire(want.size());
  std::size_t have = 0;
  while (fd >= 0 && have < wire.size()) {
    auto n = ::read(fd, wire.data() + have, wire.size() - have);
    if (n <= 0) break;
    have += static_cast<std::size_t>(n);
  }
  if (fd >= 0) ::close(fd);
  ::close(lfd);
  return wire == want ? std::string() : "socket wire bytes differ from the fixture";
}

Outcome transport_contract() {
  transport::SimTransport sim;
  auto a = soak(sim, 6, 10000);
  transport::SocketTransport sock(std::vector<transport::SocketNode>(6, transport::SocketNode{"127.0.0.1", 0}));
  auto b = soak(sock, 6, 10000);
  auto g = golden_frames();
  const bool ok = a.empty() && b.empty() && g.empty();
  return {ok, fmt("sim: %s; socket: %s; golden frames: %s", a.empty() ? "10000 ok" : a.c_str(),
                  b.empty() ? "10000 ok" : b.c_str(), g.empty() ? "match" : g.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> all{
      {1, "layout oracle equivalence", 10, layout_oracle},
      {2, "round-trip integrity", 60, round_trip},
      {3, "cache-saturation knee", 120, cache_knee},
      {4, "warm vs cold read", 120, warm_cold},
      {5, "trim-mean rule", 0, trim_rule},
      {6, "large-stripe one-to-one mapping", 0, large_stripe},
      {7, "eigenmode geometry", 60, eigen},
      {8, "collective = independent", 120, collective},
      {9, "manager durability", 0, durability},
      {10, "transport contract", 0, transport_contract},
  };
  // Optional arguments pick criteria by number.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.number)) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = c.limit_s == 0 || secs < c.limit_s;
    const bool pass = out.pass && in_time;
    failed += pass ? 0 : 1;
    std::string timing = c.limit_s > 0 ? fmt("%.2f s, limit %.0f s", secs, c.limit_s) : fmt("%.2f s", secs);
    std::printf("criterion %2d %s: %s [%s] %s\n", c.number, pass ? "PASS" : "FAIL", c.name, timing.c_str(),
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
