#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "molsync/peer/action_script.hpp"
#include "molsync/protocol/policy.hpp"
#include "molsync/protocol/result.hpp"

namespace molsync::sim {

struct PeerSpec {
  std::string name;
  bool hub = false;
  Policy policy;
  peer::ActionScript script;
};

// Peers, the links established before any script runs, and per-peer scripts.
// Script times are offsets from the end of link setup.
struct Scenario {
  std::vector<PeerSpec> peers;
  std::vector<std::pair<std::string, std::string>> links;  // (initiator, target)
  double max_rate = 20.0;
  std::filesystem::path base_dir;  // send_file paths resolve against this

  const PeerSpec* find(std::string_view name) const;
  std::string validate() const;  // empty when valid
};

struct ScenarioError {
  std::size_t line = 0;
  std::string message;
};

// Text format, one directive per line ('#' starts a comment line):
//   peer <name> [hub] [policy=r,s,c/r,s,c]
//   link <initiator> <target>
//   rate <updates-per-second>
//   script <name> <path>           ActionScript file, relative to base_dir
//   do <name> <at_ms> <verb> ...   one inline ActionScript line
Result<Scenario, ScenarioError> parse_scenario(std::string_view text,
                                               const std::filesystem::path& base_dir = {});
Result<Scenario, ScenarioError> load_scenario(const std::filesystem::path& path);

// Star around `master` (hub) with `spokes` connecting to it; no actions.
Scenario star_scenario(std::size_t spokes, bool hub = true);

}  // namespace molsync::sim
