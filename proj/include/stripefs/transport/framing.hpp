#pragma once

#include <cstddef>
#include <cstdint>

#include "stripefs/common/bytes.hpp"
#include "stripefs/transport/address.hpp"

namespace stripefs::transport {

// Socket backend frame: magic, src, dst, payload length (all u32 LE), payload.
inline constexpr std::uint32_t kFrameMagic = 0x50535446;  // "PSTF"
inline constexpr std::size_t kFrameHeaderSize = 16;

struct FrameHeader {
  NodeId src;
  NodeId dst;
  std::uint32_t payload_len = 0;
};

void encode_frame_header(const FrameHeader& header, std::uint8_t (&out)[kFrameHeaderSize]) noexcept;
Bytes encode_frame(NodeId src, NodeId dst, ByteView payload);

/// Raises Errc::protocol on a bad magic number or short input.
FrameHeader decode_frame_header(ByteView header);

}  // namespace stripefs::transport
