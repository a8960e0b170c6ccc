#include "stripefs/bench/ranks.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "stripefs/bench/digest.hpp"

namespace stripefs::bench {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr std::chrono::minutes kBarrierTimeout{5};

}  // namespace

RankReport run_rank(client::Client& client, const RankSpec& spec) {
  RankReport report;
  auto& mgr = client.manager();
  const std::uint64_t offset = spec.rank * spec.bytes;
  try {
    const Bytes data = pattern(spec.seed, spec.rank, 0, spec.bytes);
    auto h = client.open(spec.path);

    mgr.barrier(spec.barrier_base, spec.procs, kBarrierTimeout);
    auto t0 = std::chrono::steady_clock::now();
    client.write_at(h, offset, data);
    report.write_seconds = seconds_since(t0);
    mgr.barrier(spec.barrier_base + 1, spec.procs, kBarrierTimeout);
    client.close(h);

    for (std::size_t i = 0; i < spec.fillers.size(); ++i) {
      auto f = client.open(spec.fillers[i]);
      const auto stream = (i + 1) * spec.procs + spec.rank;
      client.write_at(f, offset, pattern(spec.seed, stream, 0, spec.bytes));
      client.close(f);
    }

    h = client.open(spec.path);
    mgr.barrier(spec.barrier_base + 2, spec.procs, kBarrierTimeout);
    t0 = std::chrono::steady_clock::now();
    Bytes got = client.read_at(h, offset, spec.bytes);
    report.read_seconds = seconds_since(t0);
    client.close(h);
    report.intact = got.size() == data.size() && sha256(got) == sha256(data);
    if (!report.intact) report.error = "read-back digest differs from what was written";
    mgr.barrier(spec.barrier_base + 3, spec.procs, kBarrierTimeout);
    report.completed = true;
  } catch (const Error& e) {
    report.error = e.what();
  }
  return report;
}

std::string format_report(std::uint32_t rank, const RankReport& report) {
  std::ostringstream out;
  char times[96];
  std::snprintf(times, sizeof times, "%.9f %.9f", report.write_seconds, report.read_seconds);
  out << "RESULT " << rank << ' ' << times << ' ' << (report.completed ? 1 : 0) << ' ' << (report.intact ? 1 : 0)
      << ' ' << report.error;
  return out.str();
}

bool parse_report(const std::string& line, std::uint32_t& rank, RankReport& report) {
  std::istringstream in(line);
  std::string tag;
  int completed = 0;
  int intact = 0;
  if (!(in >> tag) || tag != "RESULT") return false;
  if (!(in >> rank >> report.write_seconds >> report.read_seconds >> completed >> intact)) return false;
  report.completed = completed != 0;
  report.intact = intact != 0;
  std::getline(in >> std::ws, report.error);
  return true;
}

}  // namespace stripefs::bench
