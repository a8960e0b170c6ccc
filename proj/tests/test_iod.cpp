#include <unistd.h>

#include <filesystem>
#include <map>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "stripefs/iod/daemon.hpp"
#include "stripefs/iod/protocol.hpp"
#include "stripefs/iod/server.hpp"
#include "stripefs/transport/endpoint.hpp"
#include "stripefs/transport/sim_transport.hpp"

using namespace stripefs;
using namespace stripefs::iod;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("stripefs-iod-" + std::to_string(::getpid()) + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

// Memory store whose writes can be made to fail.
class FlakyStore final : public BackingStore {
 public:
  bool fail_writes = false;
  void create(std::uint64_t h) override { inner_.create(h); }
  void remove(std::uint64_t h) override { inner_.remove(h); }
  bool exists(std::uint64_t h) const override { return inner_.exists(h); }
  void read(std::uint64_t h, std::uint64_t off, MutableByteView out) override { inner_.read(h, off, out); }
  void write(std::uint64_t h, std::uint64_t off, ByteView data) override {
    if (fail_writes) raise(Errc::storage, "injected");
    inner_.write(h, off, data);
  }
  std::uint64_t size(std::uint64_t h) const override { return inner_.size(h); }
  std::vector<std::uint64_t> handles() const override { return inner_.handles(); }

 private:
  MemoryStore inner_;
};

void store_contract(BackingStore& s) {
  s.create(5);
  CHECK(s.exists(5));
  CHECK_FALSE(s.exists(6));
  CHECK(s.size(5) == 0);
  Bytes data{1, 2, 3, 4};
  s.write(5, 100000, data);
  CHECK(s.size(5) == 100004);
  Bytes out(10, 0xFF);
  s.read(5, 99998, out);
  CHECK(out == Bytes{0, 0, 1, 2, 3, 4, 0, 0, 0, 0});
  Bytes hole(5, 0xFF);
  s.read(5, 10, hole);
  CHECK(hole == Bytes(5, 0));
  s.create(3);
  CHECK(s.handles() == std::vector<std::uint64_t>{3, 5});
  s.remove(5);
  CHECK_FALSE(s.exists(5));
}

CacheConfig small_cache(std::uint64_t pages, double threshold, std::uint64_t page = 4096) {
  CacheConfig c;
  c.page_size = page;
  c.capacity = pages * page;
  c.dirty_threshold = threshold;
  return c;
}

}  // namespace

TEST_SUITE("iod") {
  TEST_CASE("memory store contract") {
    MemoryStore s;
    store_contract(s);
  }

  TEST_CASE("file store contract and persistence") {
    TempDir dir;
    {
      FileStore s(dir.path);
      store_contract(s);
      CHECK(std::filesystem::exists(s.path_of(3)));
      CHECK(subfile_name(3) == "0000000000000003.sub");
    }
    FileStore again(dir.path);
    CHECK(again.handles() == std::vector<std::uint64_t>{3});
  }

  TEST_CASE("dirty threshold triggers one full flush") {
    MemoryStore store;
    store.create(1);
    PageCache cache(small_cache(16, 0.5), &store);
    const Bytes page(4096, 7);
    for (int i = 0; i < 7; ++i) {
      auto cost = cache.write(1, i * 4096ull, page);
      CHECK(cost.cache_written == 4096);
      CHECK(cost.disk_written == 0);
      CHECK(cost.flush_cycles == 0);
    }
    CHECK(cache.dirty_bytes() == 7 * 4096);
    auto cost = cache.write(1, 7 * 4096ull, page);
    CHECK(cost.flush_cycles == 1);
    CHECK(cost.disk_written == 8 * 4096);
    CHECK(cache.dirty_bytes() == 0);
    CHECK(cache.resident_bytes() == 8 * 4096);
    CHECK(store.size(1) == 8 * 4096);
  }

  TEST_CASE("partial last page flushes only valid bytes") {
    MemoryStore store;
    store.create(1);
    PageCache cache(small_cache(16, 1.0), &store);
    cache.write(1, 0, Bytes(5000, 1));
    CacheCost cost;
    auto report = cache.flush(std::nullopt, &cost);
    CHECK(report.bytes == 5000);
    CHECK(cost.disk_written == 5000);
    CHECK(store.size(1) == 5000);
  }

  TEST_CASE("clean pages leave in LRU order") {
    MemoryStore store;
    store.create(1);
    PageCache cache(small_cache(4, 1.0), &store);
    for (int i = 0; i < 4; ++i) cache.write(1, i * 4096ull, Bytes(4096, static_cast<std::uint8_t>(i)));
    cache.flush(std::nullopt);
    Bytes out(4096);
    cache.read(1, 0, out);  // page 0 becomes most recent
    cache.write(1, 4 * 4096ull, Bytes(4096, 4));
    CHECK(cache.resident({1, 0}));
    CHECK_FALSE(cache.resident({1, 1}));
    CHECK(cache.resident({1, 4}));
    ServedFrom from{};
    auto cost = cache.read(1, 4096, out, &from);
    CHECK(from == ServedFrom::disk);
    CHECK(cost.disk_read() == 4096);
    CHECK(out == Bytes(4096, 1));
  }

  TEST_CASE("a full cache of dirty pages flushes to make room") {
    MemoryStore store;
    store.create(1);
    PageCache cache(small_cache(4, 1.0), &store);
    for (int i = 0; i < 3; ++i) cache.write(1, i * 4096ull, Bytes(4096, 1));
    auto cost = cache.write(1, 3 * 4096ull, Bytes(4096, 1));  // reaches 100 %
    CHECK(cost.flush_cycles == 1);
    for (int i = 4; i < 8; ++i) cache.write(1, i * 4096ull, Bytes(4096, 2));
    CHECK(cache.resident_bytes() <= 4 * 4096);
  }

  TEST_CASE("sequential and seeking disk reads are told apart") {
    MemoryStore store;
    store.create(1);
    store.write(1, 0, Bytes(8 * 4096, 3));
    PageCache cache(small_cache(64, 1.0), &store);
    cache.adopt(1, 8 * 4096);
    auto a = cache.read(1, 0, 4 * 4096);
    CHECK(a.disk_read_seek == 4096);
    CHECK(a.disk_read_sequential == 3 * 4096);
    auto b = cache.read(1, 6 * 4096, 4096);
    CHECK(b.disk_read_seek == 4096);
    auto c = cache.read(1, 0, 4096);
    CHECK(c.cache_read == 4096);
    CHECK(c.disk_read() == 0);
  }

  TEST_CASE("cache with data matches a flat array under random traffic") {
    std::mt19937_64 rng(21);
    MemoryStore store;
    PageCache cache(small_cache(12, 0.5, 512), &store);
    std::map<std::uint64_t, oracle::FlatFile> model;
    std::uint64_t written = 0, cache_written = 0, flushed = 0;
    for (std::uint64_t h = 1; h <= 3; ++h) store.create(h);
    for (int i = 0; i < 3000; ++i) {
      const std::uint64_t h = oracle::uniform(rng, 1, 3);
      const auto off = oracle::uniform(rng, 0, 20000);
      if (rng() % 2) {
        auto data = oracle::random_bytes(rng, oracle::uniform(rng, 1, 2000));
        auto cost = cache.write(h, off, data);
        model[h].write(off, data);
        written += data.size();
        cache_written += cost.cache_written;
        flushed += cost.disk_written;
        REQUIRE(static_cast<double>(cache.dirty_bytes()) < cache.config().flush_trigger());
      } else {
        const auto len = oracle::uniform(rng, 1, 3000);
        Bytes out(len);
        auto cost = cache.read(h, off, out);
        flushed += cost.disk_written;
        auto want = model[h].read(off, len);
        want.resize(len, 0);
        REQUIRE(out == want);
      }
      REQUIRE(cache.resident_bytes() <= cache.config().capacity);
    }
    CHECK(cache_written == written);
    CacheCost rest;
    cache.flush(std::nullopt, &rest);
    flushed += rest.disk_written;
    CHECK(flushed > 0);
    for (auto& [h, f] : model) {
      Bytes out(f.size());
      store.read(h, 0, out);
      CHECK(out == f.bytes());
    }
  }

  TEST_CASE("data-less cache prices the same work") {
    PageCache bare(small_cache(16, 0.5), nullptr);
    MemoryStore store;
    store.create(1);
    PageCache real(small_cache(16, 0.5), &store);
    std::mt19937_64 rng(22);
    for (int i = 0; i < 500; ++i) {
      const auto off = oracle::uniform(rng, 0, 100000);
      const auto len = oracle::uniform(rng, 1, 9000);
      CacheCost a, b;
      if (rng() % 2) {
        a = bare.write(1, off, len);
        b = real.write(1, off, Bytes(len, 1));
      } else {
        a = bare.read(1, off, len);
        Bytes out(len);
        b = real.read(1, off, out);
      }
      REQUIRE(a.cache_written == b.cache_written);
      REQUIRE(a.cache_read == b.cache_read);
      REQUIRE(a.disk_written == b.disk_written);
      REQUIRE(a.disk_read_seek == b.disk_read_seek);
      REQUIRE(a.disk_read_sequential == b.disk_read_sequential);
    }
    CHECK_THROWS_AS(real.write(1, 0, 10), Error);
  }

  TEST_CASE("throttle prices each medium") {
    ThrottleModel t;
    t.enabled = true;
    t.disk_write_bps = 10;
    t.disk_read_bps = 20;
    t.cache_read_bps = 100;
    t.cache_write_bps = 50;
    t.concurrent_read_penalty = 0.5;
    CacheCost c;
    c.disk_written = 10;
    c.disk_read_sequential = 20;
    c.disk_read_seek = 10;
    c.cache_read = 100;
    c.cache_written = 50;
    CHECK(t.seconds(c) == doctest::Approx(1 + 1 + 1 + 1 + 1));
    t.concurrent_read_penalty = 0;
    CHECK_THROWS_AS(t.validate(), Error);
  }

  TEST_CASE("daemon sub-file lifecycle") {
    Daemon d({}, std::make_unique<MemoryStore>());
    d.create(9);
    try {
      d.create(9);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::exists);
    }
    try {
      d.handle_write(8, 0, Bytes{1});
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_such_file);
    }
    auto w = d.handle_write(9, 10, Bytes{1, 2, 3});
    CHECK(w.accepted == 3);
    auto r = d.handle_read(9, 9, 5);
    CHECK(r.data == Bytes{0, 1, 2, 3, 0});
    CHECK(d.stat(9).size == 13);
    {
      auto pin = d.pin(9);
      try {
        d.remove(9);
        FAIL("no throw");
      } catch (const Error& e) {
        CHECK(e.code() == Errc::busy);
      }
    }
    d.remove(9);
    CHECK_FALSE(d.exists(9));
  }

  TEST_CASE("daemon reports accepted bytes when storage fails") {
    auto store = std::make_unique<FlakyStore>();
    auto* flaky = store.get();
    DaemonConfig cfg;
    cfg.cache = small_cache(16, 0.5);
    Daemon d(cfg, std::move(store));
    d.create(1);
    flaky->fail_writes = true;
    try {
      d.handle_write(1, 0, Bytes(10 * 4096, 1));
      FAIL("no throw");
    } catch (const StorageFailure& e) {
      CHECK(e.code() == Errc::storage);
      CHECK(e.accepted() == 8 * 4096);
    }
  }

  TEST_CASE("daemon adopts sub-files found in its store") {
    TempDir dir;
    {
      Daemon d({}, std::make_unique<FileStore>(dir.path));
      d.create(4);
      d.handle_write(4, 0, Bytes(100, 5));
      d.flush_dirty(std::nullopt);
    }
    Daemon again({}, std::make_unique<FileStore>(dir.path));
    CHECK(again.exists(4));
    CHECK(again.handle_read(4, 0, 100).data == Bytes(100, 5));
  }

  TEST_CASE("disk-directed serve coalesces and the last request wins") {
    Daemon d({}, std::make_unique<MemoryStore>());
    d.create(1);
    std::vector<GatherRequest> w{{0, 0, 4, {1, 1, 1, 1}}, {1, 2, 4, {2, 2, 2, 2}}, {2, 10, 2, {3, 3}}};
    auto res = d.disk_directed_serve(1, w, Direction::write);
    CHECK(res.overlap);
    CHECK(res.accepted == std::vector<std::uint64_t>{4, 4, 2});
    REQUIRE(res.plan.size() == 2);
    CHECK(res.plan[0].length == 6);
    CHECK(d.handle_read(1, 0, 12).data == Bytes{1, 1, 2, 2, 2, 2, 0, 0, 0, 0, 3, 3});

    std::vector<GatherRequest> r{{0, 1, 3, {}}, {1, 10, 2, {}}, {2, 0, 0, {}}};
    auto back = d.disk_directed_serve(1, r, Direction::read);
    CHECK(back.data[0] == Bytes{1, 2, 2});
    CHECK(back.data[1] == Bytes{3, 3});
    CHECK(back.data[2].empty());
  }

  TEST_CASE("stat and gather payloads round trip") {
    SubFileStat st{1, 2, 3, 4, 5};
    auto back = decode_stat(encode_stat(st));
    CHECK(back.size == 1);
    CHECK(back.disk_read_bytes == 5);

    GatherPart part{3, 1, Direction::write, {{0, 2}, {10, 1}}, {7, 8, 9}};
    auto p = decode_gather(encode_gather(part));
    CHECK(p.participants == 3);
    CHECK(p.rank == 1);
    CHECK(p.direction == Direction::write);
    REQUIRE(p.entries.size() == 2);
    CHECK(p.entries[1].offset == 10);
    CHECK(p.data == part.data);

    GatherReply reply{true, {2, 0}, {4, 4}};
    auto q = decode_gather_reply(encode_gather_reply(reply));
    CHECK(q.overlap);
    CHECK(q.lengths == reply.lengths);
    CHECK(q.data == reply.data);

    CHECK_THROWS_AS(decode_gather(Bytes{1, 2}), Error);
    CHECK(make_request(Op::read, 1, 0, 99).length == 99);
    CHECK(make_request(Op::write, 1, 0, 99, Bytes(3)).length == 3);
  }

  TEST_CASE("remote daemon over the simulator") {
    transport::SimTransport t;
    Daemon d({}, std::make_unique<MemoryStore>());
    IodServer server(t, transport::NodeId{0}, d);
    transport::Endpoint ep(t, transport::NodeId{1});
    RemoteIod iod(ep, transport::NodeId{0});
    iod.create(3);
    std::mt19937_64 rng(23);
    auto data = oracle::random_bytes(rng, 200000);
    iod.write(3, 5, data);
    CHECK(iod.read(3, 5, data.size()) == data);
    CHECK(iod.stat(3).size == 200005);
    iod.flush(std::nullopt);
    CHECK(iod.stat(3).dirty_bytes == 0);
    try {
      iod.create(3);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::exists);
    }
    iod.remove(3);
    try {
      iod.stat(3);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_such_file);
    }
  }
}
