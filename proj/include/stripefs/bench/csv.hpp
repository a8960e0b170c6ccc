#pragma once

#include <ostream>
#include <string>

#include "stripefs/bench/workload.hpp"

namespace stripefs::bench {

inline constexpr const char* kCsvHeader =
    "mode,P,N,S_bytes,stripe_bytes,run,write_bps,read_bps,served_from_cache_pct";

/// One line per run, numbered from 1, after the header when asked.
void write_csv(std::ostream& out, const BenchResult& result, bool header);

}  // namespace stripefs::bench
