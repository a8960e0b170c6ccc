#include "stripefs/transport/transport.hpp"

#include <utility>

namespace stripefs::transport {

Registration::Registration(Registration&& other) noexcept
    : owner_(std::exchange(other.owner_, nullptr)), id_(other.id_) {}

Registration& Registration::operator=(Registration&& other) noexcept {
  if (this != &other) {
    reset();
    owner_ = std::exchange(other.owner_, nullptr);
    id_ = other.id_;
  }
  return *this;
}

Registration::~Registration() { reset(); }

void Registration::reset() noexcept {
  if (owner_ != nullptr) std::exchange(owner_, nullptr)->deregister(id_);
}

}  // namespace stripefs::transport
