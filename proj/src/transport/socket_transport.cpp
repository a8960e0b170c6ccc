#include "stripefs/transport/socket_transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/uio.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "stripefs/common/error.hpp"
#include "stripefs/transport/framing.hpp"

namespace stripefs::transport {

namespace {

bool read_full(int fd, std::uint8_t* buf, std::size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, buf, n, 0);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    buf += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

bool write_full(int fd, const std::uint8_t* header, std::size_t header_len, ByteView payload) {
  iovec iov[2];
  iov[0] = {const_cast<std::uint8_t*>(header), header_len};
  iov[1] = {const_cast<std::uint8_t*>(payload.data()), payload.size()};
  int first = 0;
  int count = payload.empty() ? 1 : 2;
  while (first < count) {
    msghdr msg{};
    msg.msg_iov = iov + first;
    msg.msg_iovlen = static_cast<std::size_t>(count - first);
    ssize_t w = ::sendmsg(fd, &msg, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    auto left = static_cast<std::size_t>(w);
    while (first < count && left >= iov[first].iov_len) {
      left -= iov[first].iov_len;
      ++first;
    }
    if (first < count) {
      iov[first].iov_base = static_cast<std::uint8_t*>(iov[first].iov_base) + left;
      iov[first].iov_len -= left;
    }
  }
  return true;
}

sockaddr_in resolve(const SocketNode& node) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(node.port);
  if (::inet_pton(AF_INET, node.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(node.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    raise(Errc::config, "cannot resolve host " + node.host);
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

}  // namespace

SocketTransport::SocketTransport(std::vector<SocketNode> nodes, std::size_t mtu)
    : mtu_(mtu), nodes_(std::move(nodes)) {}

SocketTransport::~SocketTransport() {
  std::vector<NodeId> ids;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, _] : listeners_) ids.push_back(id);
  }
  for (auto id : ids) deregister(id);
  std::lock_guard lock(mu_);
  for (auto& [_, conn] : outbound_) {
    if (conn->fd >= 0) ::close(conn->fd);
  }
}

double SocketTransport::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_).count();
}

SocketNode SocketTransport::node(NodeId id) const {
  std::lock_guard lock(mu_);
  if (id.value >= nodes_.size()) raise(Errc::unreachable, to_string(id) + " not in node table");
  return nodes_[id.value];
}

Registration SocketTransport::register_receiver(NodeId id, Delivery deliver) {
  std::lock_guard lock(mu_);
  if (id.value >= nodes_.size()) raise(Errc::config, to_string(id) + " not in node table");
  if (listeners_.contains(id)) raise(Errc::already_registered, to_string(id));

  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) raise(Errc::config, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = resolve(nodes_[id.value]);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd, 128) != 0) {
    int err = errno;
    ::close(fd);
    raise(Errc::config, "cannot listen for " + to_string(id) + ": " + std::strerror(err));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  nodes_[id.value].port = ntohs(addr.sin_port);

  auto listener = std::make_unique<Listener>();
  listener->id = id;
  listener->fd = fd;
  listener->deliver = std::move(deliver);
  Listener& ref = *listener;
  listener->acceptor = std::thread([this, &ref] { accept_loop(ref); });
  listeners_.emplace(id, std::move(listener));
  return make_registration(id);
}

void SocketTransport::accept_loop(Listener& listener) {
  for (;;) {
    int fd = ::accept4(listener.fd, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      return;
    }
    if (listener.stopping) {
      ::close(fd);
      return;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(listener.readers_mu);
    auto& reader = listener.readers.emplace_back();
    reader.fd = fd;
    reader.thread = std::thread([this, &listener, fd] { read_loop(listener, fd); });
  }
}

void SocketTransport::read_loop(Listener& listener, int fd) {
  std::uint8_t raw[kFrameHeaderSize];
  while (read_full(fd, raw, kFrameHeaderSize)) {
    FrameHeader header;
    try {
      header = decode_frame_header(raw);
    } catch (const Error&) {
      break;
    }
    if (header.payload_len > mtu_ || header.dst != listener.id) break;
    Bytes payload(header.payload_len);
    if (!read_full(fd, payload.data(), payload.size())) break;
    std::lock_guard lock(listener.delivery_mu);
    if (listener.stopping) break;
    listener.deliver(Datagram{header.src, header.dst, std::move(payload)});
  }
  ::shutdown(fd, SHUT_RDWR);
}

void SocketTransport::deregister(NodeId id) noexcept {
  std::unique_ptr<Listener> listener;
  {
    std::lock_guard lock(mu_);
    auto it = listeners_.find(id);
    if (it == listeners_.end()) return;
    listener = std::move(it->second);
    listeners_.erase(it);
    for (auto conn = outbound_.begin(); conn != outbound_.end();) {
      if (conn->first.second == id) {
        std::lock_guard c(conn->second->mu);
        if (conn->second->fd >= 0) ::close(conn->second->fd);
        conn->second->fd = -1;
        conn = outbound_.erase(conn);
      } else {
        ++conn;
      }
    }
  }
  {
    std::lock_guard lock(listener->delivery_mu);
    listener->stopping = true;
  }
  ::shutdown(listener->fd, SHUT_RDWR);
  ::close(listener->fd);
  if (listener->acceptor.joinable()) listener->acceptor.join();
  std::lock_guard lock(listener->readers_mu);
  for (auto& reader : listener->readers) ::shutdown(reader.fd, SHUT_RDWR);
  for (auto& reader : listener->readers) {
    if (reader.thread.joinable()) reader.thread.join();
    ::close(reader.fd);
  }
}

std::shared_ptr<SocketTransport::Connection> SocketTransport::connection(NodeId src, NodeId dst) {
  SocketNode target;
  {
    std::lock_guard lock(mu_);
    if (dst.value >= nodes_.size()) raise(Errc::unreachable, to_string(dst) + " not in node table");
    auto it = outbound_.find({src, dst});
    if (it != outbound_.end()) return it->second;
    target = nodes_[dst.value];
  }
  if (target.port == 0) raise(Errc::unreachable, to_string(dst) + " has no port");
  sockaddr_in addr = resolve(target);
  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) raise(Errc::unreachable, std::string("socket: ") + std::strerror(errno));
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    int err = errno;
    ::close(fd);
    raise(Errc::unreachable, to_string(dst) + ": " + std::strerror(err));
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

  std::lock_guard lock(mu_);
  auto [it, inserted] = outbound_.try_emplace({src, dst}, std::make_shared<Connection>());
  if (inserted) {
    it->second->fd = fd;
  } else {
    ::close(fd);  // lost a connect race; keep the first connection
  }
  return it->second;
}

bool SocketTransport::peer_closed(Connection& conn) {
  std::lock_guard lock(conn.mu);
  if (conn.fd < 0) return true;
  // Nothing is ever sent back on an outbound connection, so readability
  // means end of stream or an error.
  pollfd p{conn.fd, POLLIN | POLLRDHUP, 0};
  if (::poll(&p, 1, 0) > 0 && (p.revents & (POLLIN | POLLRDHUP | POLLHUP | POLLERR)) != 0) {
    ::close(conn.fd);
    conn.fd = -1;
    return true;
  }
  return false;
}

void SocketTransport::drop_connection(NodeId src, NodeId dst, const std::shared_ptr<Connection>& conn) {
  std::lock_guard lock(mu_);
  auto it = outbound_.find({src, dst});
  if (it != outbound_.end() && it->second == conn) outbound_.erase(it);
}

Receipt SocketTransport::send(NodeId src, NodeId dst, ByteView payload) {
  if (payload.size() > mtu_) {
    raise(Errc::fragmentation_required,
          std::to_string(payload.size()) + " bytes exceeds mtu " + std::to_string(mtu_));
  }
  auto conn = connection(src, dst);
  if (peer_closed(*conn)) {
    // The peer went away since the last send, possibly restarted; a write
    // now would vanish into the dead socket's buffer.
    drop_connection(src, dst, conn);
    conn = connection(src, dst);
  }
  std::uint8_t header[kFrameHeaderSize];
  encode_frame_header({src, dst, static_cast<std::uint32_t>(payload.size())}, header);

  Receipt receipt;
  receipt.sent_at = now();
  bool ok = false;
  {
    std::lock_guard lock(conn->mu);
    ok = conn->fd >= 0 && write_full(conn->fd, header, kFrameHeaderSize, payload);
    if (ok) {
      receipt.seq = ++conn->seq;
    } else if (conn->fd >= 0) {
      ::close(conn->fd);
      conn->fd = -1;
    }
  }
  if (!ok) {
    drop_connection(src, dst, conn);
    raise(Errc::unreachable, to_string(dst) + ": connection lost");
  }
  receipt.delivered_at = now();
  return receipt;
}

}  // namespace stripefs::transport
