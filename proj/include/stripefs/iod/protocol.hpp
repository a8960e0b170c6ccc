#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stripefs/common/bytes.hpp"
#include "stripefs/iod/daemon.hpp"
#include "stripefs/transport/endpoint.hpp"

namespace stripefs::iod {

using transport::NodeId;

enum class Op : std::uint8_t {
  create = 1,
  write = 2,
  read = 3,
  flush = 4,
  stat = 5,
  remove = 6,
  gather = 7,
};

// FLUSH with handle 0 flushes every sub-file.
inline constexpr std::uint64_t kAllHandles = 0;

transport::Request make_request(Op op, std::uint64_t handle, std::uint64_t offset = 0, std::uint64_t length = 0,
                                Bytes payload = {});

Bytes encode_stat(const SubFileStat& st);
SubFileStat decode_stat(ByteView payload);

/// One rank's share of a disk-directed operation on one daemon. Every
/// participant sends a part to every daemon, possibly with no entries, so
/// the daemon knows when the set is complete.
struct GatherPart {
  std::uint32_t participants = 0;
  std::uint32_t rank = 0;
  Direction direction = Direction::read;
  struct Entry {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
  };
  std::vector<Entry> entries;
  Bytes data;  // writes: entry bytes back to back
};

Bytes encode_gather(const GatherPart& part);
GatherPart decode_gather(ByteView payload);

struct GatherReply {
  bool overlap = false;
  std::vector<std::uint64_t> lengths;  // per entry
  Bytes data;                          // reads: entry bytes back to back
};

Bytes encode_gather_reply(const GatherReply& reply);
GatherReply decode_gather_reply(ByteView payload);

/// Blocking calls against one remote daemon.
class RemoteIod {
 public:
  RemoteIod(transport::Endpoint& endpoint, NodeId node) : ep_(endpoint), node_(node) {}

  NodeId node() const noexcept { return node_; }

  void create(std::uint64_t handle);
  void remove(std::uint64_t handle);
  SubFileStat stat(std::uint64_t handle);
  void flush(std::optional<std::uint64_t> handle);
  void write(std::uint64_t handle, std::uint64_t offset, ByteView data);
  Bytes read(std::uint64_t handle, std::uint64_t offset, std::uint64_t length);

 private:
  transport::Response call(const transport::Request& request);

  transport::Endpoint& ep_;
  NodeId node_;
};

}  // namespace stripefs::iod
