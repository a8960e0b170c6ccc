#include "stripefs/common/error.hpp"

namespace stripefs {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_address: return "invalid-address";
    case Errc::unreachable: return "unreachable";
    case Errc::fragmentation_required: return "fragmentation-required";
    case Errc::already_registered: return "already-registered";
    case Errc::no_such_file: return "no-such-file";
    case Errc::exists: return "exists";
    case Errc::range: return "range";
    case Errc::storage: return "storage";
    case Errc::busy: return "busy";
    case Errc::capacity: return "capacity";
    case Errc::create_failed: return "create-failed";
    case Errc::config: return "config";
    case Errc::stale_handle: return "stale-handle";
    case Errc::partial_io: return "partial-io";
    case Errc::integrity: return "integrity";
    case Errc::arity: return "arity";
    case Errc::no_mapping: return "no-mapping";
    case Errc::validation: return "validation";
    case Errc::timeout: return "timeout";
    case Errc::protocol: return "protocol";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace stripefs
