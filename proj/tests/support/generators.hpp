#pragma once

// Seeded generators for property tests.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "molsync/protocol/envelope.hpp"
#include "molsync/protocol/file_transfer.hpp"
#include "molsync/protocol/peer_id.hpp"
#include "molsync/protocol/policy.hpp"

namespace molsync::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::uint64_t below(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

inline PeerId peer_id(Rng& rng) { return new_peer_id(rng); }

// Uniform random rotation (Shoemake).
inline Quaternion random_unit_quaternion(Rng& rng) {
  const double u1 = uniform(rng, 0.0, 1.0);
  const double u2 = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double u3 = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  return {a * std::sin(u2), a * std::cos(u2), b * std::sin(u3), b * std::cos(u3)};
}

// Printable ASCII plus some multi-byte UTF-8.
inline std::string text(Rng& rng, std::size_t max_len) {
  static const std::vector<std::string> pieces = {"a", "Z", "0", " ", "\"", "\\", "/", "{", "\n", "\t",
                                                  "é", "Å", "→", "α", "🧬", "\x01"};
  const std::size_t n = below(rng, max_len + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += pieces[below(rng, pieces.size())];
  return out;
}

inline std::optional<Forwarded> maybe_via(Rng& rng) {
  if (below(rng, 2) == 0) return std::nullopt;
  return Forwarded{peer_id(rng), 1 + below(rng, 1'000'000)};
}

inline Bytes bytes(Rng& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

inline Payload payload_of(Kind kind, Rng& rng) {
  switch (kind) {
    case Kind::hello: {
      Hello h;
      if (below(rng, 2)) {
        Policy p;
        p.send_rotations = below(rng, 2);
        p.apply_commands = below(rng, 2);
        h.policy = p.to_string();
      }
      return h;
    }
    case Kind::welcome: return Welcome{peer_id(rng)};
    case Kind::connect: return Connect{};
    case Kind::connect_ok: return ConnectOk{peer_id(rng)};
    case Kind::peer_joined: return PeerJoined{peer_id(rng)};
    case Kind::peer_left: return PeerLeft{peer_id(rng)};
    case Kind::rotation: {
      Rotation r = Rotation::of(random_unit_quaternion(rng));
      r.via = maybe_via(rng);
      return r;
    }
    case Kind::state: {
      Camera c;
      c.orientation = random_unit_quaternion(rng);
      c.zoom = uniform(rng, 1e-3, 1e4);
      c.center = {uniform(rng, -1e3, 1e3), uniform(rng, -1e3, 1e3), uniform(rng, -1e3, 1e3)};
      State s = State::of(c);
      s.via = maybe_via(rng);
      return s;
    }
    case Kind::command: return Command{text(rng, 120), maybe_via(rng)};
    case Kind::chat: return Chat{text(rng, 200)};
    case Kind::file_manifest: {
      const Bytes content = bytes(rng, below(rng, 300));
      return chunk_file(content, random_token(rng, kFileIdLength), text(rng, 20), 1 + below(rng, 64)).manifest;
    }
    case Kind::file_chunk:
      return FileChunk{random_token(rng, kFileIdLength), below(rng, 100), bytes(rng, below(rng, 200))};
    case Kind::file_ack: return FileAck{random_token(rng, kFileIdLength), below(rng, 2) == 1, text(rng, 20)};
    case Kind::error: return Error{text(rng, 16), text(rng, 60)};
  }
  return Connect{};
}

inline Address address(Rng& rng, bool allow_broadcast) {
  switch (below(rng, allow_broadcast ? 3 : 2)) {
    case 0: return Address::relay();
    case 1: return peer_id(rng);
    default: return Address::broadcast();
  }
}

inline Envelope envelope(Rng& rng) {
  Envelope e;
  const Kind kind = kAllKinds[below(rng, kKindCount)];
  e.payload = payload_of(kind, rng);
  e.from = address(rng, false);
  e.to = address(rng, true);
  e.seq = below(rng, 4) == 0 ? rng() : below(rng, 10'000);
  e.ts = static_cast<std::int64_t>(rng() >> 1) * (below(rng, 8) == 0 ? -1 : 1);
  return e;
}

}  // namespace molsync::testing

#include <ostream>

#include "molsync/protocol/codec.hpp"

namespace molsync {

// gtest prints envelopes as their wire text.
inline void PrintTo(const Envelope& e, std::ostream* os) { *os << encode_envelope(e); }

}  // namespace molsync
