#include "stripefs/transport/endpoint.hpp"

#include <algorithm>

#include "stripefs/common/error.hpp"

namespace stripefs::transport {

Endpoint::Endpoint(Transport& transport, NodeId self) : transport_(transport), self_(self) {
  registration_ = transport_.register_receiver(self_, [this](const Datagram& d) { on_datagram(d); });
}

Endpoint::~Endpoint() { close(); }

void Endpoint::close() {
  registration_.reset();
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

void Endpoint::send_message(NodeId dst, const Bytes& message) {
  const std::size_t mtu = transport_.mtu();
  std::lock_guard lock(send_mu_);
  std::size_t pos = 0;
  do {
    std::size_t n = std::min(mtu, message.size() - pos);
    transport_.send(self_, dst, ByteView(message).subspan(pos, n));
    pos += n;
  } while (pos < message.size());
}

void Endpoint::send_request(NodeId dst, const Request& request) {
  Bytes message = encode(request);
  {
    std::lock_guard lock(mu_);
    ++pending_[dst];
  }
  try {
    send_message(dst, message);
  } catch (...) {
    std::lock_guard lock(mu_);
    --pending_[dst];
    throw;
  }
}

void Endpoint::post(NodeId dst, const Request& request) { send_message(dst, encode(request)); }

void Endpoint::send_response(NodeId dst, const Response& response) { send_message(dst, encode(response)); }

void Endpoint::on_datagram(const Datagram& datagram) {
  std::lock_guard lock(mu_);
  auto& part = partial_[datagram.src];
  if (part.buffer.empty()) {
    auto& pending = pending_[datagram.src];
    part.response = pending > 0;
    if (part.response) --pending;
  }
  part.buffer.insert(part.buffer.end(), datagram.payload.begin(), datagram.payload.end());

  for (;;) {
    std::size_t total = part.response ? response_size(part.buffer) : request_size(part.buffer);
    if (total == 0 || part.buffer.size() < total) break;
    ByteView message = ByteView(part.buffer).first(total);
    if (part.response) {
      responses_[datagram.src].push_back(decode_response(message));
    } else {
      requests_.push_back({datagram.src, decode_request(message)});
    }
    part.buffer.erase(part.buffer.begin(), part.buffer.begin() + static_cast<std::ptrdiff_t>(total));
    if (part.buffer.empty()) break;
    auto& pending = pending_[datagram.src];
    part.response = pending > 0;
    if (part.response) --pending;
  }
  cv_.notify_all();
}

Response Endpoint::await_response(NodeId src, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  auto& queue = responses_[src];
  if (!cv_.wait_for(lock, timeout, [&] { return closed_ || !queue.empty(); })) {
    raise(Errc::timeout, "no response from " + to_string(src));
  }
  if (queue.empty()) raise(Errc::unreachable, "endpoint closed");
  Response r = std::move(queue.front());
  queue.pop_front();
  return r;
}

std::optional<Incoming> Endpoint::next_request(std::chrono::milliseconds timeout) {
  return next_request_matching([](const Incoming&) { return true; }, timeout);
}

std::optional<Incoming> Endpoint::next_request_matching(const std::function<bool(const Incoming&)>& match,
                                                        std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  std::deque<Incoming>::iterator found;
  auto ready = [&] {
    found = std::find_if(requests_.begin(), requests_.end(), match);
    return closed_ || found != requests_.end();
  };
  if (!cv_.wait_for(lock, timeout, ready) || found == requests_.end()) return std::nullopt;
  Incoming in = std::move(*found);
  requests_.erase(found);
  return in;
}

}  // namespace stripefs::transport
