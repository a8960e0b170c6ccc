#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stripefs/common/error.hpp"

namespace stripefs {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using MutableByteView = std::span<std::uint8_t>;

// Little-endian append-only encoder used by every wire format.
class WireWriter {
 public:
  WireWriter() = default;
  explicit WireWriter(Bytes& out) : out_(&out) {}

  void u8(std::uint8_t v) { buf().push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void bytes(ByteView v) { buf().insert(buf().end(), v.begin(), v.end()); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  }

  Bytes take() { return std::move(own_); }
  std::size_t size() const { return out_ ? out_->size() : own_.size(); }

 private:
  Bytes& buf() { return out_ ? *out_ : own_; }
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf().push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  Bytes own_;
  Bytes* out_ = nullptr;
};

// Bounds-checked decoder; truncated input raises Errc::protocol.
class WireReader {
 public:
  explicit WireReader(ByteView in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  ByteView bytes(std::size_t n) {
    need(n);
    auto v = in_.subspan(pos_, n);
    pos_ += n;
    return v;
  }
  std::string str() {
    auto n = u32();
    auto v = bytes(n);
    return {reinterpret_cast<const char*>(v.data()), v.size()};
  }

  std::size_t remaining() const { return in_.size() - pos_; }
  ByteView rest() { return bytes(remaining()); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) raise(Errc::protocol, "truncated message");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace stripefs
