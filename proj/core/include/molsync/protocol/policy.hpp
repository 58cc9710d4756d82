#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "molsync/protocol/envelope.hpp"

namespace molsync {

// The six independent send/apply toggles.
struct Policy {
  bool send_rotations = true;
  bool send_states = true;
  bool send_commands = true;
  bool apply_rotations = true;
  bool apply_states = true;
  bool apply_commands = true;

  static Policy all_on() { return {}; }

  // "r,s,c/r,s,c" with 0/1 digits: send triple, then apply triple.
  static std::optional<Policy> parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const Policy&) const = default;
};

// Rotation, state and command kinds follow their toggle; every other kind
// passes (chat and files have no toggle).
bool gate_outbound(Kind kind, const Policy& policy) noexcept;
bool gate_inbound(Kind kind, const Policy& policy) noexcept;

}  // namespace molsync
