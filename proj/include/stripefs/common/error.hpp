#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stripefs {

enum class Errc : std::uint8_t {
  invalid_address,
  unreachable,
  fragmentation_required,
  already_registered,
  no_such_file,
  exists,
  range,
  storage,
  busy,
  capacity,
  create_failed,
  config,
  stale_handle,
  partial_io,
  integrity,
  arity,
  no_mapping,
  validation,
  timeout,
  protocol,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure surfaced by the library carries one of the Errc codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& what);

}  // namespace stripefs
