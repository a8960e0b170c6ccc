#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace stripefs::transport {

/// Cluster node number, counted from 0.
struct NodeId {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const NodeId&) const = default;
};

/// Network address of a node. host_index is the final component of the
/// node's network address; the port is only meaningful to the socket backend.
struct Address {
  std::uint32_t host_index = 1;
  std::uint16_t port = 0;

  constexpr auto operator<=>(const Address&) const = default;
};

// Node numbers equal the final address component minus one, so addresses can
// be derived without any lookup table.
Address node_id_to_address(NodeId id, std::uint16_t port = 0) noexcept;
NodeId address_to_node_id(const Address& addr);

std::string to_string(NodeId id);

}  // namespace stripefs::transport

template <>
struct std::hash<stripefs::transport::NodeId> {
  std::size_t operator()(stripefs::transport::NodeId id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
