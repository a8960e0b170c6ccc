#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stripefs/client/client.hpp"

namespace stripefs::bench {

/// What one benchmark rank does against a running cluster.
struct RankSpec {
  std::uint32_t rank = 0;
  std::uint32_t procs = 1;
  std::string path;
  std::vector<std::string> fillers;  // written between the phases
  std::uint64_t bytes = 0;           // S, at offset rank * S
  std::uint64_t seed = 1;
  std::uint64_t barrier_base = 1;
};

struct RankReport {
  double write_seconds = 0.0;
  double read_seconds = 0.0;
  bool completed = false;  // every step ran without error
  bool intact = false;     // and the read-back digest matched
  std::string error;
};

/// Writes, barriers through the manager, closes, reopens, writes fillers
/// if any, reads back and compares digests. Errors end up in the report.
RankReport run_rank(client::Client& client, const RankSpec& spec);

std::string format_report(std::uint32_t rank, const RankReport& report);
/// Parses a line from format_report; false if it is not one.
bool parse_report(const std::string& line, std::uint32_t& rank, RankReport& report);

}  // namespace stripefs::bench
