#pragma once

#include <cstdint>
#include <vector>

#include "stripefs/client/client.hpp"

namespace stripefs::client {

enum class CollectiveMode { independent, two_phase, disk_directed };

/// Where two-phase file domains end: on stripe boundaries of the file's
/// distribution, or at even splits of the accessed range.
enum class TwoPhaseAlign { stripe, naive };

struct CollectiveOptions {
  CollectiveMode mode = CollectiveMode::two_phase;
  TwoPhaseAlign align = TwoPhaseAlign::stripe;
};

/// Ranks 0..P-1 taking part in collective calls; rank 0 coordinates. Every
/// member must make the same sequence of collective calls.
class CollectiveGroup {
 public:
  CollectiveGroup(Client& client, std::vector<NodeId> members, std::uint32_t rank);

  Client& client() noexcept { return client_; }
  std::uint32_t rank() const noexcept { return rank_; }
  std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(members_.size()); }
  NodeId member(std::uint32_t rank) const { return members_.at(rank); }

  /// Identifier of the next collective call, equal on every member.
  std::uint64_t next_op();

  /// Every rank contributes one blob; every rank gets all of them, by rank.
  std::vector<Bytes> allgather(std::uint64_t op, std::uint8_t tag, Bytes mine);

  /// Raises on every rank if any rank reports failure.
  void agree(std::uint64_t op, const std::string& local_error);

  void barrier();

 private:
  Client& client_;
  std::vector<NodeId> members_;
  std::uint32_t rank_;
  std::uint64_t seq_ = 0;
};

/// Writes this rank's data at offset in its view. Returns the bytes written.
/// The file ends up as if every rank had called write_at itself; where
/// ranks overlap the highest rank wins.
std::uint64_t collective_write(CollectiveGroup& group, FileHandle h, std::uint64_t offset, ByteView data,
                               const CollectiveOptions& options = {});

Bytes collective_read(CollectiveGroup& group, FileHandle h, std::uint64_t offset, std::uint64_t length,
                      const CollectiveOptions& options = {});

}  // namespace stripefs::client
