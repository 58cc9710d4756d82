#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molsync/protocol/codec.hpp"
#include "molsync/protocol/envelope.hpp"
#include "molsync/relay/registry.hpp"

namespace molsync::relay {

inline constexpr std::size_t kDefaultMaxPeers = 1024;

struct RelayConfig {
  std::size_t max_peers = kDefaultMaxPeers;
  std::optional<std::uint64_t> id_seed;  // unset: seeded from std::random_device
  std::size_t drop_log_capacity = 4096;
};

enum class DropReason { no_links, origin_excluded, gated };

std::string_view drop_reason_name(DropReason reason) noexcept;

struct RouteDecision {
  std::vector<PeerId> recipients;  // sorted, never contains the sender
  std::optional<DropReason> drop_reason;
};

// One frame to write to a connection. Relayed frames are the sender's bytes,
// untouched.
struct Outbound {
  ConnectionId connection;
  std::string frame;
  Kind kind = Kind::error;
};

struct Reaction {
  std::vector<Outbound> out;
  bool close = false;  // close the originating connection after writing `out`
};

struct DropRecord {
  Address from;
  Kind kind = Kind::error;
  std::uint64_t seq = 0;
  DropReason reason = DropReason::no_links;
};

// Error codes sent back to peers.
namespace codes {
inline constexpr std::string_view server_full = "server_full";
inline constexpr std::string_view peer_not_found = "peer_not_found";
inline constexpr std::string_view self_connect = "self_connect";
inline constexpr std::string_view not_linked = "not_linked";
inline constexpr std::string_view not_registered = "not_registered";
inline constexpr std::string_view bad_from = "bad_from";
inline constexpr std::string_view unexpected_kind = "unexpected_kind";
}  // namespace codes

// The broker: assigns IDs, keeps the link graph and routes frames along links.
// Not thread-safe; the owner serializes all calls (one strand / one thread).
class Relay {
 public:
  explicit Relay(RelayConfig config = {});

  // Entry point for transports: one decoded-or-not text frame.
  Reaction on_frame(ConnectionId connection, std::string_view frame, std::int64_t now_ms);
  // Transport closed; emits peer_left to former link partners.
  std::vector<Outbound> on_close(ConnectionId connection);

  // Registers the connection under a fresh ID and answers with welcome, or
  // server_full (and close) once max_peers are registered. A repeated hello
  // only refreshes the policy snapshot.
  Reaction handle_hello(ConnectionId connection, const Hello& hello, std::int64_t now_ms);

  // Adds the link {from, target}: connect_ok to `from`, peer_joined to the
  // target (first time only). Errors go back to `from`.
  std::vector<Outbound> handle_connect(const PeerId& from, const Address& target);

  // Recipients for a rotation/state/command/chat/file frame from a registered
  // sender. Pure: no side effects.
  RouteDecision route(const Envelope& e) const;

  std::vector<Outbound> handle_disconnect(const PeerId& peer);

  const PeerRegistry& registry() const noexcept { return registry_; }
  const std::deque<DropRecord>& drop_log() const noexcept { return drop_log_; }
  std::uint64_t drops_total() const noexcept { return drops_total_; }

 private:
  Outbound to_connection(ConnectionId connection, Envelope e);
  Outbound error_to(ConnectionId connection, const Address& to, std::string_view code,
                    std::string message);
  void record_drop(const Envelope& e, DropReason reason);
  std::vector<Outbound> forward(ConnectionId connection, const PeerId& sender, const Envelope& e,
                                std::string_view frame);

  RelayConfig config_;
  IdRng rng_;
  PeerRegistry registry_;
  std::uint64_t seq_ = 0;
  std::int64_t now_ms_ = 0;
  std::deque<DropRecord> drop_log_;
  std::uint64_t drops_total_ = 0;
};

}  // namespace molsync::relay
