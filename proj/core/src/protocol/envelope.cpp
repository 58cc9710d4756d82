#include "molsync/protocol/envelope.hpp"

namespace molsync {
namespace {

constexpr std::array<std::string_view, kKindCount> kKindNames = {
    "hello", "welcome", "connect", "connect_ok", "peer_joined", "peer_left", "rotation",
    "state", "command", "chat", "file_manifest", "file_chunk", "file_ack", "error"};

}  // namespace

std::string_view kind_name(Kind kind) noexcept {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<Kind> parse_kind(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<Kind>(i);
  }
  return std::nullopt;
}

Address Address::broadcast() {
  Address a;
  a.value_ = Broadcast{};
  return a;
}

std::optional<Address> Address::parse(std::string_view wire) {
  if (wire.empty()) return Address::relay();
  if (wire == "*") return Address::broadcast();
  if (auto id = PeerId::parse(wire)) return Address(*id);
  return std::nullopt;
}

std::string Address::wire() const {
  if (is_broadcast()) return "*";
  if (is_peer()) return peer().str();
  return {};
}

Rotation Rotation::of(const Quaternion& orientation) {
  return Rotation{to_wire_precision(orientation), std::nullopt};
}

State State::of(const Camera& camera) {
  Camera c = validated(camera);
  c.orientation = to_wire_precision(c.orientation);
  return State{c, std::nullopt};
}

const Forwarded* forwarded(const Envelope& e) noexcept {
  if (auto* r = e.get_if<Rotation>()) return r->via ? &*r->via : nullptr;
  if (auto* s = e.get_if<State>()) return s->via ? &*s->via : nullptr;
  if (auto* c = e.get_if<Command>()) return c->via ? &*c->via : nullptr;
  return nullptr;
}

std::optional<UpdateKey> update_key(const Envelope& e) {
  if (const Forwarded* f = forwarded(e)) return UpdateKey{f->origin, f->origin_seq};
  if (!e.from.is_peer()) return std::nullopt;
  return UpdateKey{e.from.peer(), e.seq};
}

Envelope make_error(Address to, std::string code, std::string message) {
  Envelope e;
  e.to = std::move(to);
  e.payload = Error{std::move(code), std::move(message)};
  return e;
}

}  // namespace molsync
