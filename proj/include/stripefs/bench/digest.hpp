#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "stripefs/common/bytes.hpp"

namespace stripefs::bench {

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(ByteView data);
  std::array<std::uint8_t, 32> finish();

 private:
  void* ctx_;
};

std::array<std::uint8_t, 32> sha256(ByteView data);
std::string to_hex(std::span<const std::uint8_t> digest);

/// Deterministic pseudo-random bytes for a (seed, stream) pair. Any byte
/// range of a stream can be produced without the bytes before it.
void fill_pattern(std::uint64_t seed, std::uint64_t stream, std::uint64_t offset, MutableByteView out);
Bytes pattern(std::uint64_t seed, std::uint64_t stream, std::uint64_t offset, std::uint64_t length);

}  // namespace stripefs::bench
