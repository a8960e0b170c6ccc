#include "stripefs/transport/message.hpp"

namespace stripefs::transport {

Bytes encode(const Request& request) {
  if (carries_payload(request.opcode) && request.payload.size() != request.length) {
    raise(Errc::protocol, "request length field does not match payload");
  }
  Bytes out;
  out.reserve(kRequestHeaderSize + request.payload.size());
  WireWriter w(out);
  w.u8(request.opcode);
  w.u64(request.handle);
  w.u64(request.offset);
  w.u64(request.length);
  w.bytes(request.payload);
  return out;
}

Bytes encode(const Response& response) {
  Bytes out;
  out.reserve(kResponseHeaderSize + response.payload.size());
  WireWriter w(out);
  w.u8(response.status);
  w.u64(response.payload.size());
  w.bytes(response.payload);
  return out;
}

std::size_t request_size(ByteView prefix) {
  if (prefix.size() < kRequestHeaderSize) return 0;
  WireReader in(prefix);
  auto opcode = in.u8();
  in.u64();
  in.u64();
  auto length = in.u64();
  return kRequestHeaderSize + (carries_payload(opcode) ? length : 0);
}

std::size_t response_size(ByteView prefix) {
  if (prefix.size() < kResponseHeaderSize) return 0;
  WireReader in(prefix);
  in.u8();
  return kResponseHeaderSize + in.u64();
}

Request decode_request(ByteView message) {
  WireReader in(message);
  Request r;
  r.opcode = in.u8();
  r.handle = in.u64();
  r.offset = in.u64();
  r.length = in.u64();
  if (carries_payload(r.opcode)) {
    auto p = in.bytes(r.length);
    r.payload.assign(p.begin(), p.end());
  }
  if (in.remaining() != 0) raise(Errc::protocol, "trailing bytes after request");
  return r;
}

Response decode_response(ByteView message) {
  WireReader in(message);
  Response r;
  r.status = in.u8();
  auto p = in.bytes(in.u64());
  r.payload.assign(p.begin(), p.end());
  if (in.remaining() != 0) raise(Errc::protocol, "trailing bytes after response");
  return r;
}

Status status_of(Errc code) noexcept {
  switch (code) {
    case Errc::no_such_file: return Status::no_such_file;
    case Errc::exists: return Status::exists;
    case Errc::range: return Status::range;
    case Errc::storage: return Status::storage;
    case Errc::busy: return Status::busy;
    case Errc::protocol: return Status::protocol;
    case Errc::create_failed: return Status::create_failed;
    case Errc::config: return Status::config;
    case Errc::capacity: return Status::capacity;
    case Errc::no_mapping: return Status::no_mapping;
    case Errc::validation: return Status::validation;
    default: return Status::failed;
  }
}

Errc errc_of(Status status) noexcept {
  switch (status) {
    case Status::no_such_file: return Errc::no_such_file;
    case Status::exists: return Errc::exists;
    case Status::range: return Errc::range;
    case Status::storage: return Errc::storage;
    case Status::busy: return Errc::busy;
    case Status::create_failed: return Errc::create_failed;
    case Status::config: return Errc::config;
    case Status::capacity: return Errc::capacity;
    case Status::no_mapping: return Errc::no_mapping;
    case Status::validation: return Errc::validation;
    default: return Errc::protocol;
  }
}

Response error_response(Errc code, std::string_view what, std::uint64_t detail) {
  Response r;
  r.status = static_cast<std::uint8_t>(status_of(code));
  WireWriter w(r.payload);
  w.u64(detail);
  w.bytes({reinterpret_cast<const std::uint8_t*>(what.data()), what.size()});
  return r;
}

Response error_response(const Error& error, std::uint64_t detail) {
  return error_response(error.code(), error.what(), detail);
}

Response ok_response(Bytes payload) {
  Response r;
  r.payload = std::move(payload);
  return r;
}

RemoteError remote_error(const Response& response) {
  RemoteError e{errc_of(static_cast<Status>(response.status)), 0, {}};
  if (response.payload.size() >= 8) {
    WireReader r(response.payload);
    e.detail = r.u64();
    auto text = r.rest();
    e.what.assign(text.begin(), text.end());
  }
  return e;
}

void check(const Response& response) {
  if (response.status == 0) return;
  auto e = remote_error(response);
  raise(e.code, e.what);
}

}  // namespace stripefs::transport
