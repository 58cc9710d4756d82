#include "molsync/relay/relay.hpp"

#include <random>

namespace molsync::relay {
namespace {

std::uint64_t seed_from(const RelayConfig& config) {
  if (config.id_seed) return *config.id_seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

std::string_view drop_reason_name(DropReason reason) noexcept {
  switch (reason) {
    case DropReason::no_links: return "no_links";
    case DropReason::origin_excluded: return "origin_excluded";
    case DropReason::gated: return "gated";
  }
  return "no_links";
}

Relay::Relay(RelayConfig config) : config_(config), rng_(seed_from(config)) {}

Outbound Relay::to_connection(ConnectionId connection, Envelope e) {
  e.seq = ++seq_;
  if (e.ts == 0) e.ts = now_ms_;
  const Kind kind = e.kind();
  return Outbound{connection, encode_envelope(e), kind};
}

Outbound Relay::error_to(ConnectionId connection, const Address& to, std::string_view code,
                         std::string message) {
  return to_connection(connection, make_error(to, std::string(code), std::move(message)));
}

void Relay::record_drop(const Envelope& e, DropReason reason) {
  ++drops_total_;
  if (config_.drop_log_capacity == 0) return;
  if (drop_log_.size() == config_.drop_log_capacity) drop_log_.pop_front();
  drop_log_.push_back(DropRecord{e.from, e.kind(), e.seq, reason});
}

Reaction Relay::handle_hello(ConnectionId connection, const Hello& hello, std::int64_t now_ms) {
  Policy policy;
  if (hello.policy) policy = Policy::parse(*hello.policy).value_or(Policy{});

  if (auto existing = registry_.peer_for(connection)) {
    registry_.find(*existing)->policy = policy;
    Envelope welcome;
    welcome.to = *existing;
    welcome.ts = now_ms;
    welcome.payload = Welcome{*existing};
    return {{to_connection(connection, std::move(welcome))}, false};
  }
  if (registry_.size() >= config_.max_peers) {
    return {{error_to(connection, Address::relay(), codes::server_full,
                      "relay has reached its peer limit")},
            true};
  }
  PeerId id = new_peer_id(rng_);
  while (registry_.contains(id)) id = new_peer_id(rng_);
  registry_.add(id, PeerRecord{connection, policy, now_ms});

  Envelope welcome;
  welcome.to = id;
  welcome.ts = now_ms;
  welcome.payload = Welcome{id};
  return {{to_connection(connection, std::move(welcome))}, false};
}

std::vector<Outbound> Relay::handle_connect(const PeerId& from, const Address& target) {
  const PeerRecord* sender = registry_.find(from);
  if (sender == nullptr) return {};
  const ConnectionId conn = sender->connection;
  if (!target.is_peer() || !registry_.contains(target.peer())) {
    return {error_to(conn, from, codes::peer_not_found,
                     "no peer with id '" + target.wire() + "'")};
  }
  const PeerId& other = target.peer();
  if (other == from) return {error_to(conn, from, codes::self_connect, "cannot link to self")};

  const bool existed = registry_.linked(from, other);
  registry_.link(from, other);

  std::vector<Outbound> out;
  Envelope ok;
  ok.to = from;
  ok.payload = ConnectOk{other};
  out.push_back(to_connection(conn, std::move(ok)));
  if (!existed) {
    Envelope joined;
    joined.to = other;
    joined.payload = PeerJoined{from};
    out.push_back(to_connection(registry_.find(other)->connection, std::move(joined)));
  }
  return out;
}

RouteDecision Relay::route(const Envelope& e) const {
  RouteDecision d;
  if (!e.from.is_peer()) {
    d.drop_reason = DropReason::no_links;
    return d;
  }
  const PeerId& sender = e.from.peer();
  const PeerRecord* record = registry_.find(sender);
  if (record == nullptr) {
    d.drop_reason = DropReason::no_links;
    return d;
  }
  if (!gate_outbound(e.kind(), record->policy)) {
    d.drop_reason = DropReason::gated;
    return d;
  }
  if (e.to.is_broadcast()) {
    d.recipients = registry_.links_of(sender);
  } else if (e.to.is_peer()) {
    if (e.to.peer() == sender) {
      d.drop_reason = DropReason::origin_excluded;
      return d;
    }
    if (registry_.linked(sender, e.to.peer())) d.recipients.push_back(e.to.peer());
  }
  if (d.recipients.empty()) d.drop_reason = DropReason::no_links;
  return d;
}

std::vector<Outbound> Relay::forward(ConnectionId connection, const PeerId& sender,
                                     const Envelope& e, std::string_view frame) {
  if (e.to.is_peer() && e.to.peer() != sender && !registry_.contains(e.to.peer())) {
    record_drop(e, DropReason::no_links);
    return {error_to(connection, sender, codes::peer_not_found,
                     "no peer with id '" + e.to.wire() + "'")};
  }
  const RouteDecision decision = route(e);
  if (decision.drop_reason) {
    record_drop(e, *decision.drop_reason);
    if (e.to.is_peer() && *decision.drop_reason == DropReason::no_links) {
      return {error_to(connection, sender, codes::not_linked,
                       "not linked to '" + e.to.wire() + "'")};
    }
    return {};
  }
  std::vector<Outbound> out;
  out.reserve(decision.recipients.size());
  for (const PeerId& r : decision.recipients) {
    out.push_back(Outbound{registry_.find(r)->connection, std::string(frame), e.kind()});
  }
  return out;
}

Reaction Relay::on_frame(ConnectionId connection, std::string_view frame, std::int64_t now_ms) {
  now_ms_ = now_ms;
  const auto sender = registry_.peer_for(connection);
  const Address reply_to = sender ? Address(*sender) : Address::relay();

  auto decoded = decode_envelope(frame);
  if (!decoded) {
    const DecodeError& err = decoded.error();
    return {{error_to(connection, reply_to, decode_error_name(err.code), err.detail)}, false};
  }
  const Envelope& e = decoded.value();

  if (e.kind() == Kind::hello) return handle_hello(connection, std::get<Hello>(e.payload), now_ms);
  if (!sender) {
    return {{error_to(connection, reply_to, codes::not_registered, "send hello first")}, false};
  }
  if (!e.from.is_peer() || e.from.peer() != *sender) {
    return {{error_to(connection, reply_to, codes::bad_from, "'from' must be your peer id")}, false};
  }

  switch (e.kind()) {
    case Kind::connect: return {handle_connect(*sender, e.to), false};
    case Kind::rotation:
    case Kind::state:
    case Kind::command:
    case Kind::chat:
    case Kind::file_manifest:
    case Kind::file_chunk:
    case Kind::file_ack: return {forward(connection, *sender, e, frame), false};
    default:
      return {{error_to(connection, reply_to, codes::unexpected_kind,
                        std::string(kind_name(e.kind())) + " is sent by the relay only")},
              false};
  }
}

std::vector<Outbound> Relay::handle_disconnect(const PeerId& peer) {
  std::vector<Outbound> out;
  for (const PeerId& other : registry_.remove(peer)) {
    Envelope left;
    left.to = other;
    left.payload = PeerLeft{peer};
    out.push_back(to_connection(registry_.find(other)->connection, std::move(left)));
  }
  return out;
}

std::vector<Outbound> Relay::on_close(ConnectionId connection) {
  if (auto peer = registry_.peer_for(connection)) return handle_disconnect(*peer);
  return {};
}

}  // namespace molsync::relay
