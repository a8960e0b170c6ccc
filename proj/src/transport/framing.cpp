#include "stripefs/transport/framing.hpp"

#include <algorithm>

namespace stripefs::transport {

namespace {

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

void encode_frame_header(const FrameHeader& header, std::uint8_t (&out)[kFrameHeaderSize]) noexcept {
  put_u32(out, kFrameMagic);
  put_u32(out + 4, header.src.value);
  put_u32(out + 8, header.dst.value);
  put_u32(out + 12, header.payload_len);
}

Bytes encode_frame(NodeId src, NodeId dst, ByteView payload) {
  std::uint8_t header[kFrameHeaderSize];
  encode_frame_header({src, dst, static_cast<std::uint32_t>(payload.size())}, header);
  Bytes out(kFrameHeaderSize + payload.size());
  std::copy(header, header + kFrameHeaderSize, out.begin());
  std::copy(payload.begin(), payload.end(), out.begin() + kFrameHeaderSize);
  return out;
}

FrameHeader decode_frame_header(ByteView header) {
  WireReader in(header.first(std::min(header.size(), kFrameHeaderSize)));
  if (in.remaining() < kFrameHeaderSize) raise(Errc::protocol, "short frame header");
  if (in.u32() != kFrameMagic) raise(Errc::protocol, "bad frame magic");
  FrameHeader h;
  h.src = NodeId{in.u32()};
  h.dst = NodeId{in.u32()};
  h.payload_len = in.u32();
  return h;
}

}  // namespace stripefs::transport
