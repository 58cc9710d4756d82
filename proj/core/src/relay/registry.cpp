#include "molsync/relay/registry.hpp"

#include <algorithm>

namespace molsync::relay {

std::pair<PeerId, PeerId> PeerRegistry::key(const PeerId& a, const PeerId& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

bool PeerRegistry::add(const PeerId& id, PeerRecord record) {
  if (peers_.contains(id) || by_connection_.contains(record.connection)) return false;
  by_connection_.emplace(record.connection, id);
  peers_.emplace(id, record);
  return true;
}

std::vector<PeerId> PeerRegistry::remove(const PeerId& id) {
  std::vector<PeerId> former = links_of(id);
  auto it = peers_.find(id);
  if (it == peers_.end()) return former;
  by_connection_.erase(it->second.connection);
  peers_.erase(it);
  for (const PeerId& other : former) links_.erase(key(id, other));
  return former;
}

const PeerRecord* PeerRegistry::find(const PeerId& id) const {
  auto it = peers_.find(id);
  return it == peers_.end() ? nullptr : &it->second;
}

PeerRecord* PeerRegistry::find(const PeerId& id) {
  auto it = peers_.find(id);
  return it == peers_.end() ? nullptr : &it->second;
}

std::optional<PeerId> PeerRegistry::peer_for(ConnectionId connection) const {
  auto it = by_connection_.find(connection);
  if (it == by_connection_.end()) return std::nullopt;
  return it->second;
}

bool PeerRegistry::link(const PeerId& a, const PeerId& b) {
  if (a == b || !contains(a) || !contains(b)) return false;
  links_.insert(key(a, b));
  return true;
}

bool PeerRegistry::linked(const PeerId& a, const PeerId& b) const {
  return a != b && links_.contains(key(a, b));
}

std::vector<PeerId> PeerRegistry::links_of(const PeerId& id) const {
  std::vector<PeerId> out;
  for (const auto& [a, b] : links_) {
    if (a == id) out.push_back(b);
    if (b == id) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool PeerRegistry::consistent() const {
  return std::all_of(links_.begin(), links_.end(), [&](const auto& link) {
    return link.first < link.second && contains(link.first) && contains(link.second);
  });
}

}  // namespace molsync::relay
