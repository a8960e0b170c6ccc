#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "stripefs/common/bytes.hpp"
#include "stripefs/layout/distribution.hpp"
#include "stripefs/metamgr/manager.hpp"
#include "stripefs/transport/endpoint.hpp"

namespace stripefs::metamgr {

enum class Op : std::uint8_t {
  create = 10,  // payload: path, partition, distribution -> FileMeta
  open = 11,    // payload: path -> FileMeta
  remove = 12,  // payload: path
  size = 13,    // handle, offset = high-water mark -> u64 logical size
  list = 14,    // -> u32 count, FileMeta...
  barrier = 15, // handle = barrier id, offset = participant count; replies once all arrive
};

constexpr bool is_manager_op(std::uint8_t opcode) { return opcode >= 10 && opcode <= 15; }

// Distribution: u8 kind, then
//   round-robin:  stripe_size u64, n_iods u32, base_iod u32
//   block-cyclic: block u64, n_iods u32
//   irregular:    count u32, then (iod u32, length u64) per extent
void encode_distribution(WireWriter& w, const layout::Distribution& dist);
layout::Distribution decode_distribution(WireReader& r);

void encode_meta(WireWriter& w, const FileMeta& meta);
FileMeta decode_meta(WireReader& r);

/// Blocking calls against a remote manager.
class RemoteManager {
 public:
  RemoteManager(transport::Endpoint& endpoint, NodeId node) : ep_(endpoint), node_(node) {}

  NodeId node() const noexcept { return node_; }

  FileMeta create_file(const std::string& path, const layout::Distribution& dist, const std::string& partition = {});
  FileMeta open(const std::string& path);
  void remove(const std::string& path);
  std::uint64_t update_size(std::uint64_t handle, std::uint64_t high_water);
  std::vector<FileMeta> list();
  void barrier(std::uint64_t id, std::uint32_t participants,
               std::chrono::milliseconds timeout = std::chrono::minutes(10));

 private:
  transport::Response call(Op op, std::uint64_t handle, std::uint64_t offset, Bytes payload);

  transport::Endpoint& ep_;
  NodeId node_;
};

}  // namespace stripefs::metamgr
