#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "molsync/protocol/peer_id.hpp"
#include "molsync/protocol/policy.hpp"

namespace molsync::relay {

// Opaque handle of one transport connection.
struct ConnectionId {
  std::uint64_t value = 0;
  auto operator<=>(const ConnectionId&) const = default;
};

struct PeerRecord {
  ConnectionId connection;
  Policy policy;  // snapshot announced in hello
  std::int64_t joined_ms = 0;
};

// Peers and the undirected links between them. Links are stored once as an
// ordered (min, max) pair; removing a peer removes its links.
class PeerRegistry {
 public:
  bool add(const PeerId& id, PeerRecord record);
  // Returns the peers that were linked to `id`, sorted.
  std::vector<PeerId> remove(const PeerId& id);

  bool contains(const PeerId& id) const { return peers_.contains(id); }
  const PeerRecord* find(const PeerId& id) const;
  PeerRecord* find(const PeerId& id);
  std::optional<PeerId> peer_for(ConnectionId connection) const;

  // False if either endpoint is unknown or a == b. Idempotent.
  bool link(const PeerId& a, const PeerId& b);
  bool linked(const PeerId& a, const PeerId& b) const;
  std::vector<PeerId> links_of(const PeerId& id) const;

  std::size_t size() const noexcept { return peers_.size(); }
  std::size_t link_count() const noexcept { return links_.size(); }
  const std::set<std::pair<PeerId, PeerId>>& links() const noexcept { return links_; }

  // Every link endpoint is registered and stored in canonical order.
  bool consistent() const;

 private:
  static std::pair<PeerId, PeerId> key(const PeerId& a, const PeerId& b);

  std::map<PeerId, PeerRecord> peers_;
  std::map<ConnectionId, PeerId> by_connection_;
  std::set<std::pair<PeerId, PeerId>> links_;
};

}  // namespace molsync::relay
