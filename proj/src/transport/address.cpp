#include "stripefs/transport/address.hpp"

#include "stripefs/common/error.hpp"

namespace stripefs::transport {

Address node_id_to_address(NodeId id, std::uint16_t port) noexcept {
  return Address{id.value + 1, port};
}

NodeId address_to_node_id(const Address& addr) {
  if (addr.host_index == 0) raise(Errc::invalid_address, "host index 0 has no node id");
  return NodeId{addr.host_index - 1};
}

std::string to_string(NodeId id) { return "node" + std::to_string(id.value); }

}  // namespace stripefs::transport
