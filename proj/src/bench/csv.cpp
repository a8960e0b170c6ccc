#include "stripefs/bench/csv.hpp"

#include <cstdio>

namespace stripefs::bench {

void write_csv(std::ostream& out, const BenchResult& result, bool header) {
  if (header) out << kCsvHeader << '\n';
  const auto& c = result.config;
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    const auto& run = result.runs[i];
    char line[256];
    std::snprintf(line, sizeof line, "%s,%u,%u,%llu,%llu,%zu,%.0f,%.0f,%.2f", to_string(c.mode), c.procs, c.iods,
                  static_cast<unsigned long long>(c.bytes_per_proc()), static_cast<unsigned long long>(c.stripe),
                  i + 1, run.write_bps, run.read_bps, run.served_from_cache_pct);
    out << line << '\n';
  }
}

}  // namespace stripefs::bench
