#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "molsync/protocol/policy.hpp"
#include "molsync/protocol/quaternion.hpp"
#include "molsync/protocol/result.hpp"

namespace molsync::peer {

struct ConnectTo {
  std::string target;  // peer ID, or a name the driver resolves
  bool operator==(const ConnectTo&) const = default;
};
struct SetPolicy {
  Policy policy;
  bool operator==(const SetPolicy&) const = default;
};
struct Drag {
  Quaternion orientation;  // absolute
  bool operator==(const Drag&) const = default;
};
// Incremental drag: compose the current orientation with a rotation about
// `axis` by `degrees`.
struct Rotate {
  std::array<double, 3> axis{};
  double degrees = 0.0;
  bool operator==(const Rotate&) const = default;
};
struct SetZoom {
  double zoom = 100.0;
  bool operator==(const SetZoom&) const = default;
};
struct SendCommand {
  std::string script;
  bool operator==(const SendCommand&) const = default;
};
struct SendChat {
  std::string text;
  bool operator==(const SendChat&) const = default;
};
struct SendFile {
  std::string path;
  bool operator==(const SendFile&) const = default;
};
struct Disconnect {
  bool operator==(const Disconnect&) const = default;
};

using ActionBody =
    std::variant<ConnectTo, SetPolicy, Drag, Rotate, SetZoom, SendCommand, SendChat, SendFile, Disconnect>;

std::string_view verb_name(const ActionBody& body) noexcept;

struct Action {
  std::int64_t at_ms = 0;
  ActionBody body;
  bool operator==(const Action&) const = default;
};

struct ActionScript {
  std::vector<Action> actions;  // at_ms non-decreasing
  bool operator==(const ActionScript&) const = default;
};

struct ScriptError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

// Line format: `<at_ms> <verb> <args...>`. Blank lines and lines starting with
// '#' are skipped. Verbs:
//   connect <peer>            policy <r,s,c/r,s,c>     drag <w> <x> <y> <z>
//   rotate <ax> <ay> <az> <deg>   zoom <percent>        command <text...>
//   chat <text...>            send_file <path>         disconnect
Result<ActionScript, ScriptError> parse_action_script(std::string_view text);

// Inverse of parse_action_script for one action.
std::string format_action(const Action& action);

}  // namespace molsync::peer
