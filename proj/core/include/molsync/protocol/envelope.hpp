#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "molsync/protocol/camera.hpp"
#include "molsync/protocol/peer_id.hpp"
#include "molsync/protocol/quaternion.hpp"

namespace molsync {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxScriptBytes = 65536;
inline constexpr std::size_t kMaxSnapshotFrameBytes = 512;

// Order matches the Payload variant below.
enum class Kind : std::uint8_t {
  hello,
  welcome,
  connect,
  connect_ok,
  peer_joined,
  peer_left,
  rotation,
  state,
  command,
  chat,
  file_manifest,
  file_chunk,
  file_ack,
  error,
};

inline constexpr std::size_t kKindCount = 14;

inline constexpr std::array<Kind, kKindCount> kAllKinds = {
    Kind::hello,       Kind::welcome,   Kind::connect,    Kind::connect_ok,
    Kind::peer_joined, Kind::peer_left, Kind::rotation,   Kind::state,
    Kind::command,     Kind::chat,      Kind::file_manifest, Kind::file_chunk,
    Kind::file_ack,    Kind::error};

std::string_view kind_name(Kind kind) noexcept;
std::optional<Kind> parse_kind(std::string_view name) noexcept;

// Rotation and state frames are absolute snapshots: safe to drop or coalesce.
constexpr bool is_snapshot(Kind kind) noexcept {
  return kind == Kind::rotation || kind == Kind::state;
}

// Kinds a peer applies to its viewer.
constexpr bool is_view_update(Kind kind) noexcept {
  return kind == Kind::rotation || kind == Kind::state || kind == Kind::command;
}

// Sender or recipient of an envelope. "" on the wire means the relay itself
// (or a peer that has no ID yet), "*" is the broadcast marker.
class Address {
 public:
  Address() = default;  // relay / unassigned
  Address(PeerId peer) : value_(std::move(peer)) {}  // NOLINT: implicit by intent

  static Address relay() { return Address(); }
  static Address broadcast();
  static std::optional<Address> parse(std::string_view wire);

  bool is_relay() const noexcept { return std::holds_alternative<std::monostate>(value_); }
  bool is_broadcast() const noexcept { return std::holds_alternative<Broadcast>(value_); }
  bool is_peer() const noexcept { return std::holds_alternative<PeerId>(value_); }
  const PeerId& peer() const { return std::get<PeerId>(value_); }

  std::string wire() const;

  bool operator==(const Address&) const = default;

 private:
  struct Broadcast {
    bool operator==(const Broadcast&) const = default;
  };
  std::variant<std::monostate, Broadcast, PeerId> value_;
};

// Present on rotation/state/command frames that a hub re-shares (hop 1).
// Identifies the original sender and its sequence number.
struct Forwarded {
  PeerId origin;
  std::uint64_t origin_seq = 0;

  bool operator==(const Forwarded&) const = default;
};

struct Hello {
  // Optional announced policy, informational for the relay ("r,s,c/r,s,c").
  std::optional<std::string> policy;
  bool operator==(const Hello&) const = default;
};

struct Welcome {
  PeerId id;
  bool operator==(const Welcome&) const = default;
};

// The target is the envelope's `to` field.
struct Connect {
  bool operator==(const Connect&) const = default;
};

struct ConnectOk {
  PeerId peer;
  bool operator==(const ConnectOk&) const = default;
};

struct PeerJoined {
  PeerId peer;
  bool operator==(const PeerJoined&) const = default;
};

struct PeerLeft {
  PeerId peer;
  bool operator==(const PeerLeft&) const = default;
};

struct Rotation {
  Quaternion q;
  std::optional<Forwarded> via;

  // Orientation at wire precision.
  static Rotation of(const Quaternion& orientation);
  bool operator==(const Rotation&) const = default;
};

struct State {
  Camera camera;
  std::optional<Forwarded> via;

  // Validated camera with the orientation at wire precision.
  static State of(const Camera& camera);
  bool operator==(const State&) const = default;
};

struct Command {
  std::string script;
  std::optional<Forwarded> via;
  bool operator==(const Command&) const = default;
};

struct Chat {
  std::string text;
  bool operator==(const Chat&) const = default;
};

struct FileManifest {
  std::string file_id;
  std::string name;
  std::uint64_t total_bytes = 0;
  std::uint64_t chunk_size = 0;
  std::uint64_t chunk_count = 0;
  std::string digest;  // lowercase hex SHA-256 of the full content

  bool operator==(const FileManifest&) const = default;
};

struct FileChunk {
  std::string file_id;
  std::uint64_t index = 0;
  std::vector<std::uint8_t> data;

  bool operator==(const FileChunk&) const = default;
};

struct FileAck {
  std::string file_id;
  bool ok = true;
  std::string reason;

  bool operator==(const FileAck&) const = default;
};

struct Error {
  std::string code;
  std::string message;

  bool operator==(const Error&) const = default;
};

using Payload = std::variant<Hello, Welcome, Connect, ConnectOk, PeerJoined, PeerLeft,
                             Rotation, State, Command, Chat, FileManifest, FileChunk,
                             FileAck, Error>;

static_assert(std::variant_size_v<Payload> == kKindCount);

struct Envelope {
  int version = kProtocolVersion;
  Address from;
  Address to;
  std::uint64_t seq = 0;
  std::int64_t ts = 0;  // sender wall clock, ms since epoch; diagnostics only
  Payload payload;

  Kind kind() const noexcept { return static_cast<Kind>(payload.index()); }

  template <class T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&payload);
  }

  bool operator==(const Envelope&) const = default;
};

// Hop marker of rotation/state/command payloads; nullptr for other kinds and
// for original (hop 0) frames.
const Forwarded* forwarded(const Envelope& e) noexcept;

// (origin, sequence) that last-writer-wins ordering is keyed on: the original
// sender for re-shared frames, the envelope sender otherwise.
struct UpdateKey {
  PeerId origin;
  std::uint64_t seq = 0;
};
std::optional<UpdateKey> update_key(const Envelope& e);

Envelope make_error(Address to, std::string code, std::string message);

}  // namespace molsync
