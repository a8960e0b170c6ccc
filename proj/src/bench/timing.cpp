#include "stripefs/bench/timing.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>

#include "stripefs/common/error.hpp"
#include "stripefs/layout/mapping.hpp"
#include "stripefs/transport/message.hpp"

namespace stripefs::bench {

double PhaseTiming::max_elapsed() const {
  return elapsed.empty() ? 0.0 : *std::max_element(elapsed.begin(), elapsed.end());
}

TimingModel::TimingModel(TimingParams params, std::uint32_t n_iods, std::uint32_t n_ranks, std::uint64_t seed)
    : params_(params), n_iods_(n_iods), n_ranks_(n_ranks), seed_(seed), rank_links_(n_ranks), iod_links_(n_iods),
      iod_busy_(n_iods, 0.0) {
  if (n_iods == 0 || n_ranks == 0) raise(Errc::config, "timing model needs ranks and daemons");
  params_.net.validate();
  params_.throttle.enabled = true;
  params_.throttle.validate();
  for (std::uint32_t i = 0; i < n_iods; ++i) caches_.push_back(std::make_unique<iod::PageCache>(params_.cache));
}

double TimingModel::now() const {
  double t = epoch_;
  for (const auto& l : rank_links_) t = std::max({t, l.tx_free, l.rx_free});
  for (const auto& l : iod_links_) t = std::max({t, l.tx_free, l.rx_free});
  for (double b : iod_busy_) t = std::max(t, b);
  return t;
}

void TimingModel::barrier() {
  epoch_ = now();
  for (auto& l : rank_links_) l = {epoch_, epoch_};
  for (auto& l : iod_links_) l = {epoch_, epoch_};
  std::fill(iod_busy_.begin(), iod_busy_.end(), epoch_);
}

PhaseTiming TimingModel::run_phase(const std::vector<std::vector<Access>>& accesses, bool write) {
  if (accesses.size() != n_ranks_) raise(Errc::config, "one access list per rank expected");
  barrier();
  const double start = epoch_;

  struct Req {
    std::uint64_t handle;
    std::uint64_t sub_offset;
    std::uint64_t length;
  };
  // Per rank: the daemons it addresses in first-touch order, each with its
  // requests in file order.
  struct RankState {
    std::vector<std::uint32_t> iods;
    std::vector<std::vector<Req>> reqs;
    std::vector<std::size_t> next;
    std::vector<std::uint32_t> in_flight;
    std::size_t cursor = 0;
    std::size_t remaining = 0;
    bool idle = true;
    double done = 0.0;
  };
  std::vector<RankState> ranks(n_ranks_);
  for (std::uint32_t r = 0; r < n_ranks_; ++r) {
    auto& st = ranks[r];
    st.done = start;
    std::vector<int> slot(n_iods_, -1);
    for (const auto& a : accesses[r]) {
      if (a.length == 0) continue;
      for (const auto& sub : layout::logical_to_physical(a.offset, a.length, a.dist)) {
        if (sub.iod >= n_iods_) raise(Errc::config, "access maps past the modelled daemons");
        if (slot[sub.iod] < 0) {
          slot[sub.iod] = static_cast<int>(st.iods.size());
          st.iods.push_back(sub.iod);
          st.reqs.emplace_back();
        }
        for (const auto& part : layout::split_at(sub, params_.request_size)) {
          st.reqs[static_cast<std::size_t>(slot[sub.iod])].push_back({a.handle, part.offset, part.length});
          ++st.remaining;
        }
      }
    }
    st.next.assign(st.iods.size(), 0);
    st.in_flight.assign(st.iods.size(), 0);
  }

  std::vector<std::uint32_t> priority(n_ranks_);
  std::iota(priority.begin(), priority.end(), 0u);
  std::mt19937_64 rng(seed_ * 0x9E3779B97F4A7C15ull + ++phase_);
  std::shuffle(priority.begin(), priority.end(), rng);

  enum class Kind : std::uint8_t { rank_send, iod_arrive, rank_arrive, window_free };
  struct Event {
    double time;
    std::uint32_t tie;
    std::uint64_t seq;
    Kind kind;
    std::uint32_t rank;
    std::uint32_t slot;  // index into the rank's daemon list
    Req req;
  };
  auto later = [](const Event& a, const Event& b) {
    if (a.time != b.time) return a.time > b.time;
    if (a.tie != b.tie) return a.tie > b.tie;
    return a.seq > b.seq;
  };
  std::priority_queue<Event, std::vector<Event>, decltype(later)> events(later);
  std::uint64_t seq = 0;
  auto push = [&](double t, Kind k, std::uint32_t r, std::uint32_t slot = 0, Req req = {}) {
    events.push({t, priority[r], seq++, k, r, slot, req});
  };

  // Occupies a link for `bytes` no earlier than `ready`; returns when the
  // message has fully passed it.
  auto occupy = [&](double& free_at, std::uint64_t bytes, double ready) {
    const double done = std::max(ready, free_at) + params_.net.wire_seconds(bytes);
    free_at = done;
    return done;
  };

  const auto req_header = transport::kRequestHeaderSize;
  const auto resp_header = transport::kResponseHeaderSize;
  const auto window = std::max<std::uint32_t>(params_.window, 1);

  PhaseTiming out;
  out.elapsed.assign(n_ranks_, 0.0);
  for (std::uint32_t r = 0; r < n_ranks_; ++r) {
    if (ranks[r].remaining > 0) {
      ranks[r].idle = false;
      push(start, Kind::rank_send, r);
    }
  }

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    auto& st = ranks[ev.rank];
    switch (ev.kind) {
      case Kind::rank_send: {
        // Next daemon in cyclic order with work left and room in its window.
        const auto n = st.iods.size();
        std::size_t pick = n;
        for (std::size_t k = 0; k < n; ++k) {
          const auto i = (st.cursor + k) % n;
          if (st.next[i] < st.reqs[i].size() && st.in_flight[i] < window) {
            pick = i;
            break;
          }
        }
        if (pick == n) {
          st.idle = true;
          break;
        }
        st.cursor = (pick + 1) % n;
        const Req q = st.reqs[pick][st.next[pick]++];
        ++st.in_flight[pick];
        --st.remaining;
        const auto bytes = req_header + (write ? q.length : 0);
        const double sent = occupy(rank_links_[ev.rank].tx_free, bytes, ev.time);
        push(sent, Kind::iod_arrive, ev.rank, static_cast<std::uint32_t>(pick), q);
        if (st.remaining > 0) {
          push(sent, Kind::rank_send, ev.rank);
        } else {
          st.idle = true;
        }
        break;
      }
      case Kind::iod_arrive: {
        const auto iod = st.iods[ev.slot];
        auto& link = iod_links_[iod];
        const auto bytes = req_header + (write ? ev.req.length : 0);
        // The receive side streams alongside the sender when it is free.
        const double received = occupy(link.rx_free, bytes, ev.time - params_.net.wire_seconds(bytes));
        auto& cache = *caches_[iod];
        const auto cost = write ? cache.write(ev.req.handle, ev.req.sub_offset, ev.req.length)
                                : cache.read(ev.req.handle, ev.req.sub_offset, ev.req.length);
        out.cost += cost;
        const double served =
            std::max(received + params_.net.latency_seconds(), iod_busy_[iod]) + params_.throttle.seconds(cost);
        iod_busy_[iod] = served;
        const auto reply = resp_header + (write ? 0 : ev.req.length);
        const double sent = occupy(link.tx_free, reply, served);
        push(sent, Kind::rank_arrive, ev.rank, ev.slot, {0, 0, reply});
        break;
      }
      case Kind::rank_arrive: {
        const auto bytes = ev.req.length;
        const double received =
            occupy(rank_links_[ev.rank].rx_free, bytes, ev.time - params_.net.wire_seconds(bytes));
        push(received + params_.net.latency_seconds(), Kind::window_free, ev.rank, ev.slot);
        break;
      }
      case Kind::window_free: {
        --st.in_flight[ev.slot];
        st.done = std::max(st.done, ev.time);
        if (st.idle && st.remaining > 0) {
          st.idle = false;
          push(std::max(ev.time, rank_links_[ev.rank].tx_free), Kind::rank_send, ev.rank);
        }
        break;
      }
    }
  }
  for (std::uint32_t r = 0; r < n_ranks_; ++r) out.elapsed[r] = ranks[r].done - start;
  return out;
}

}  // namespace stripefs::bench
