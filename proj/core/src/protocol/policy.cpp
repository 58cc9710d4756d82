#include "molsync/protocol/policy.hpp"

#include <array>

namespace molsync {

std::optional<Policy> Policy::parse(std::string_view text) {
  // Exactly "d,d,d/d,d,d".
  if (text.size() != 11 || text[5] != '/') return std::nullopt;
  std::array<bool, 6> bits{};
  constexpr std::array<std::size_t, 6> positions = {0, 2, 4, 6, 8, 10};
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const char c = text[positions[i]];
    if (c != '0' && c != '1') return std::nullopt;
    bits[i] = c == '1';
  }
  for (std::size_t sep : {1u, 3u, 7u, 9u}) {
    if (text[sep] != ',') return std::nullopt;
  }
  return Policy{bits[0], bits[1], bits[2], bits[3], bits[4], bits[5]};
}

std::string Policy::to_string() const {
  auto d = [](bool b) { return b ? '1' : '0'; };
  return {d(send_rotations), ',', d(send_states),     ',', d(send_commands), '/',
          d(apply_rotations), ',', d(apply_states), ',', d(apply_commands)};
}

bool gate_outbound(Kind kind, const Policy& policy) noexcept {
  switch (kind) {
    case Kind::rotation: return policy.send_rotations;
    case Kind::state: return policy.send_states;
    case Kind::command: return policy.send_commands;
    default: return true;
  }
}

bool gate_inbound(Kind kind, const Policy& policy) noexcept {
  switch (kind) {
    case Kind::rotation: return policy.apply_rotations;
    case Kind::state: return policy.apply_states;
    case Kind::command: return policy.apply_commands;
    default: return true;
  }
}

}  // namespace molsync
