#include <map>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace stripefs;
using namespace stripefs::layout;

namespace {

Distribution random_regular(std::mt19937_64& rng) {
  const std::uint64_t stripes[] = {1, 7, 4096, 65536};
  const auto stripe = stripes[rng() % 4];
  const auto n = static_cast<std::uint32_t>(oracle::uniform(rng, 1, 64));
  if (rng() % 4 == 0) return BlockCyclic{stripe, n};
  return StripeSpec{stripe, n, static_cast<std::uint32_t>(rng() % n)};
}

Irregular random_irregular(std::mt19937_64& rng) {
  Irregular irr;
  const auto n = oracle::uniform(rng, 1, 12);
  for (std::uint64_t i = 0; i < n; ++i) {
    irr.extents.push_back({static_cast<std::uint32_t>(rng() % 5), oracle::uniform(rng, 1, 5000)});
  }
  return irr;
}

View random_view(std::mt19937_64& rng) {
  switch (rng() % 3) {
    case 0:
      return View::full();
    case 1: {
      const auto block = oracle::uniform(rng, 1, 3000);
      return BlockCyclicView{oracle::uniform(rng, 0, 5000), block, block * oracle::uniform(rng, 1, 6)};
    }
    default: {
      ExtentListView v;
      std::uint64_t at = oracle::uniform(rng, 0, 100);
      for (int i = 0, n = static_cast<int>(oracle::uniform(rng, 1, 8)); i < n; ++i) {
        const auto len = oracle::uniform(rng, 1, 2000);
        v.extents.push_back({at, len});
        at += len + oracle::uniform(rng, 0, 3000);
      }
      return v;
    }
  }
}

}  // namespace

TEST_SUITE("layout") {
  TEST_CASE("round robin matches the byte mapper") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
      auto dist = random_regular(rng);
      const auto unit = dist.unit();
      const auto off = oracle::uniform(rng, 0, 40 * unit + 1000);
      const auto len = oracle::uniform(rng, 0, std::min<std::uint64_t>(6 * unit * dist.n_iods() + 100, 20000));
      REQUIRE(logical_to_physical(off, len, dist) == oracle::map_bytes(off, len, dist));
    }
  }

  TEST_CASE("irregular matches the byte mapper and stops at coverage") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 500; ++i) {
      Distribution dist = random_irregular(rng);
      const auto total = dist.coverage();
      const auto off = oracle::uniform(rng, 0, total - 1);
      const auto len = oracle::uniform(rng, 0, total - off);
      REQUIRE(logical_to_physical(off, len, dist) == oracle::map_bytes(off, len, dist));
      try {
        logical_to_physical(off, total - off + 1, dist);
        FAIL("no throw");
      } catch (const Error& e) {
        CHECK(e.code() == Errc::no_mapping);
      }
    }
  }

  TEST_CASE("physical_to_logical inverts the mapping") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 3000; ++i) {
      Distribution dist = rng() % 5 == 0 ? Distribution(random_irregular(rng)) : random_regular(rng);
      const auto limit = dist.kind() == DistributionKind::irregular ? dist.coverage() - 1 : 1ull << 40;
      const auto b = oracle::uniform(rng, 0, limit);
      auto p = oracle::place(b, dist);
      REQUIRE(physical_to_logical(p.iod, p.sub, dist) == b);
    }
  }

  TEST_CASE("merged pieces are contiguous in logical order") {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 500; ++i) {
      auto dist = random_regular(rng);
      const auto off = oracle::uniform(rng, 0, 1 << 20);
      const auto len = oracle::uniform(rng, 1, 1 << 20);
      std::uint64_t at = off, total = 0;
      for (const auto& e : logical_to_physical(off, len, dist)) {
        REQUIRE(physical_to_logical(e.iod, e.offset, dist) == at);
        REQUIRE(physical_to_logical(e.iod, e.end() - 1, dist) == at + e.length - 1);
        at += e.length;
        total += e.length;
      }
      REQUIRE(total == len);
    }
  }

  TEST_CASE("view_to_file matches the byte walk") {
    std::mt19937_64 rng(15);
    for (int i = 0; i < 1000; ++i) {
      auto view = random_view(rng);
      const auto cap = view.bounded() ? view.size() : 30000;
      const auto off = oracle::uniform(rng, 0, cap);
      const auto len = oracle::uniform(rng, 0, cap - off);
      REQUIRE(view_to_file(view, off, len) == oracle::view_bytes(view, off, len));
    }
  }

  TEST_CASE("bounded views refuse to run past their end") {
    View v = ExtentListView{{{0, 10}, {20, 10}}};
    CHECK(v.size() == 20);
    try {
      view_to_file(v, 15, 6);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::range);
    }
    CHECK(v.length_within(25) == 15);
    CHECK(v.length_within(5) == 5);
  }

  TEST_CASE("views and distributions validate") {
    CHECK_THROWS_AS(View(BlockCyclicView{0, 10, 5}).validate(), Error);
    CHECK_THROWS_AS(View(BlockCyclicView{0, 0, 5}).validate(), Error);
    CHECK_THROWS_AS(View(ExtentListView{{{10, 5}, {12, 5}}}).validate(), Error);
    CHECK_THROWS_AS(Distribution(StripeSpec{0, 4, 0}).validate(), Error);
    CHECK_THROWS_AS(Distribution(StripeSpec{4096, 0, 0}).validate(), Error);
    CHECK_THROWS_AS(Distribution(StripeSpec{4096, 4, 4}).validate(), Error);
    CHECK_THROWS_AS(Distribution(Irregular{}).validate(), Error);
    CHECK_NOTHROW(Distribution(StripeSpec{4096, 4, 3}).validate());
  }

  TEST_CASE("coalesce matches a coverage bitmap") {
    std::mt19937_64 rng(16);
    for (int i = 0; i < 500; ++i) {
      std::vector<SubExtent> in;
      for (int k = 0, n = static_cast<int>(oracle::uniform(rng, 0, 15)); k < n; ++k) {
        in.push_back({static_cast<std::uint32_t>(rng() % 3), oracle::uniform(rng, 0, 400), oracle::uniform(rng, 0, 80)});
      }
      std::map<std::uint32_t, std::vector<int>> count;
      for (const auto& e : in) {
        auto& c = count[e.iod];
        c.resize(std::max<std::size_t>(c.size(), e.end() + 1), 0);
        for (auto b = e.offset; b < e.end(); ++b) ++c[b];
      }
      auto runs = [&](int at_least) {
        std::vector<SubExtent> out;
        for (const auto& [iod, c] : count) {
          for (std::uint64_t b = 0; b < c.size(); ++b) {
            if (c[b] < at_least) continue;
            if (!out.empty() && out.back().iod == iod && out.back().end() == b) {
              ++out.back().length;
            } else {
              out.push_back({iod, b, 1});
            }
          }
        }
        return out;
      };
      auto got = coalesce(in);
      REQUIRE(got.extents == runs(1));
      REQUIRE(got.overlaps == runs(2));
    }
  }

  TEST_CASE("split_at cuts on chunk boundaries") {
    auto parts = split_at({2, 100, 300}, 128);
    REQUIRE(parts.size() == 4);
    CHECK(parts[0] == SubExtent{2, 100, 28});
    CHECK(parts[1] == SubExtent{2, 128, 128});
    CHECK(parts[2] == SubExtent{2, 256, 128});
    CHECK(parts[3] == SubExtent{2, 384, 16});
    CHECK(split_at({0, 0, 0}, 64).empty());
  }

  TEST_CASE("match_layout agrees with the byte oracle") {
    const Distribution dist = StripeSpec{1000, 4, 0};
    // One stripe per view block, each block on a single daemon.
    CHECK(match_layout(BlockCyclicView{1000, 1000, 4000}, dist, 40000) == Conformance::conforming);
    CHECK(match_layout(BlockCyclicView{500, 1000, 4000}, dist, 40000) == Conformance::non_conforming);
    CHECK(match_layout(View::full(), dist, 40000) == Conformance::non_conforming);
    CHECK(match_layout(View::full(), dist, 40000, 1000) == Conformance::conforming);
    CHECK(match_layout(View::full(), dist, 1000) == Conformance::conforming);

    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
      auto view = random_view(rng);
      const Distribution d = StripeSpec{oracle::uniform(rng, 1, 4000), static_cast<std::uint32_t>(oracle::uniform(rng, 1, 5)), 0};
      const auto size = oracle::uniform(rng, 0, 20000);
      bool ok = true;
      for (const auto& run : oracle::view_bytes(view, 0, view.length_within(size))) {
        ok = ok && oracle::map_bytes(run.offset, run.length, d).size() == 1;
      }
      REQUIRE((match_layout(view, d, size) == Conformance::conforming) == ok);
    }
  }
}
