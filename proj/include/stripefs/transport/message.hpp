#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "stripefs/common/bytes.hpp"

namespace stripefs::transport {

// Request: opcode u8, handle u64, offset u64, length u64, payload.
// Response: status u8, length u64, payload of that length.
// Messages larger than one datagram are sent as consecutive datagrams and
// reassembled from the length fields.
inline constexpr std::size_t kRequestHeaderSize = 25;
inline constexpr std::size_t kResponseHeaderSize = 9;

// READ's length field names the extent to read, not a payload.
inline constexpr std::uint8_t kReadOpcode = 3;

struct Request {
  std::uint8_t opcode = 0;
  std::uint64_t handle = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  Bytes payload;
};

struct Response {
  std::uint8_t status = 0;
  Bytes payload;
};

constexpr bool carries_payload(std::uint8_t opcode) { return opcode != kReadOpcode; }

Bytes encode(const Request& request);
Bytes encode(const Response& response);
Request decode_request(ByteView message);
Response decode_response(ByteView message);

// Status byte of a response. Daemon and manager share the numbering.
enum class Status : std::uint8_t {
  ok = 0,
  no_such_file = 1,
  exists = 2,
  range = 3,
  storage = 4,
  busy = 5,
  protocol = 6,
  create_failed = 7,
  config = 8,
  capacity = 9,
  no_mapping = 10,
  validation = 11,
  failed = 12,
};

Status status_of(Errc code) noexcept;
Errc errc_of(Status status) noexcept;

// An error response's payload is a u64 detail word followed by the message
// text. For a failed WRITE the detail is the number of bytes accepted.
Response error_response(Errc code, std::string_view what, std::uint64_t detail = 0);
Response error_response(const Error& error, std::uint64_t detail = 0);
Response ok_response(Bytes payload = {});

struct RemoteError {
  Errc code;
  std::uint64_t detail;
  std::string what;
};

/// Decodes the error carried by a non-OK response.
RemoteError remote_error(const Response& response);

/// Raises the carried error unless the response is OK.
void check(const Response& response);

/// Total encoded size given a complete header, or 0 if the header is short.
std::size_t request_size(ByteView prefix);
std::size_t response_size(ByteView prefix);

}  // namespace stripefs::transport
