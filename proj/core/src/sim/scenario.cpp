#include "molsync/sim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace molsync::sim {
namespace {

std::vector<std::string_view> split_ws(std::string_view s, std::size_t max_parts) {
  std::vector<std::string_view> parts;
  while (!s.empty()) {
    const std::size_t start = s.find_first_not_of(" \t\r");
    if (start == std::string_view::npos) break;
    s.remove_prefix(start);
    if (parts.size() + 1 == max_parts) {
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
      parts.push_back(s);
      break;
    }
    const std::size_t end = s.find_first_of(" \t\r");
    parts.push_back(s.substr(0, end));
    s = end == std::string_view::npos ? std::string_view{} : s.substr(end);
  }
  return parts;
}

bool valid_name(std::string_view name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-';
  });
}

}  // namespace

const PeerSpec* Scenario::find(std::string_view name) const {
  auto it = std::find_if(peers.begin(), peers.end(), [&](const PeerSpec& p) { return p.name == name; });
  return it == peers.end() ? nullptr : &*it;
}

std::string Scenario::validate() const {
  if (peers.empty()) return "scenario declares no peers";
  std::set<std::string> names;
  for (const PeerSpec& p : peers) {
    if (!valid_name(p.name)) return "invalid peer name '" + p.name + "'";
    if (!names.insert(p.name).second) return "duplicate peer '" + p.name + "'";
  }
  for (const auto& [a, b] : links) {
    if (!names.contains(a) || !names.contains(b)) return "link " + a + " -> " + b + " names an undeclared peer";
    if (a == b) return "link " + a + " -> " + b + " is a self link";
  }
  if (!(max_rate > 0.0)) return "rate must be positive";
  return {};
}

Result<Scenario, ScenarioError> parse_scenario(std::string_view text,
                                               const std::filesystem::path& base_dir) {
  Scenario scenario;
  scenario.base_dir = base_dir;
  std::map<std::string, std::vector<peer::Action>> extra;  // from script/do lines, in file order
  std::size_t line_no = 0;

  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    auto parts = split_ws(line, 3);
    if (parts.empty() || parts[0].front() == '#') continue;
    auto error = [&](std::string message) { return ScenarioError{line_no, std::move(message)}; };
    const std::string_view directive = parts[0];

    if (directive == "peer") {
      auto words = split_ws(line, 16);
      if (words.size() < 2 || !valid_name(words[1])) return error("peer needs a name");
      PeerSpec spec;
      spec.name = std::string(words[1]);
      for (std::size_t i = 2; i < words.size(); ++i) {
        if (words[i] == "hub") {
          spec.hub = true;
        } else if (words[i].starts_with("policy=")) {
          auto p = Policy::parse(words[i].substr(7));
          if (!p) return error("bad policy '" + std::string(words[i]) + "'");
          spec.policy = *p;
        } else {
          return error("unknown peer option '" + std::string(words[i]) + "'");
        }
      }
      if (scenario.find(spec.name)) return error("duplicate peer '" + spec.name + "'");
      scenario.peers.push_back(std::move(spec));
    } else if (directive == "link") {
      auto words = split_ws(line, 16);
      if (words.size() != 3) return error("link takes <initiator> <target>");
      scenario.links.emplace_back(std::string(words[1]), std::string(words[2]));
    } else if (directive == "rate") {
      double rate = 0;
      auto words = split_ws(line, 16);
      if (words.size() != 2) return error("rate takes one number");
      auto [ptr, ec] = std::from_chars(words[1].data(), words[1].data() + words[1].size(), rate);
      if (ec != std::errc() || ptr != words[1].data() + words[1].size() || !(rate > 0)) {
        return error("rate must be a positive number");
      }
      scenario.max_rate = rate;
    } else if (directive == "script") {
      if (parts.size() != 3) return error("script takes <peer> <path>");
      const auto path = base_dir / std::filesystem::path(std::string(parts[2]));
      std::ifstream is(path);
      if (!is) return error("cannot read script '" + path.string() + "'");
      std::stringstream ss;
      ss << is.rdbuf();
      auto parsed = peer::parse_action_script(ss.str());
      if (!parsed) {
        return error(path.filename().string() + ":" + std::to_string(parsed.error().line) + ": " +
                     parsed.error().message);
      }
      auto& list = extra[std::string(parts[1])];
      list.insert(list.end(), parsed.value().actions.begin(), parsed.value().actions.end());
    } else if (directive == "do") {
      if (parts.size() != 3) return error("do takes <peer> <at_ms> <verb> ...");
      auto parsed = peer::parse_action_script(parts[2]);
      if (!parsed) return error(parsed.error().message);
      auto& list = extra[std::string(parts[1])];
      list.insert(list.end(), parsed.value().actions.begin(), parsed.value().actions.end());
    } else {
      return error("unknown directive '" + std::string(directive) + "'");
    }
  }

  for (auto& [name, actions] : extra) {
    auto it = std::find_if(scenario.peers.begin(), scenario.peers.end(),
                           [&](const PeerSpec& p) { return p.name == name; });
    if (it == scenario.peers.end()) return ScenarioError{0, "actions for undeclared peer '" + name + "'"};
    std::stable_sort(actions.begin(), actions.end(),
                     [](const peer::Action& a, const peer::Action& b) { return a.at_ms < b.at_ms; });
    it->script.actions = std::move(actions);
  }
  if (auto err = scenario.validate(); !err.empty()) return ScenarioError{0, err};
  return scenario;
}

Result<Scenario, ScenarioError> load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) return ScenarioError{0, "cannot read scenario '" + path.string() + "'"};
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

Scenario star_scenario(std::size_t spokes, bool hub) {
  Scenario s;
  s.peers.push_back(PeerSpec{"master", hub, {}, {}});
  for (std::size_t i = 0; i < spokes; ++i) {
    const std::string name = "spoke" + std::to_string(i + 1);
    s.peers.push_back(PeerSpec{name, false, {}, {}});
    s.links.emplace_back(name, "master");
  }
  return s;
}

}  // namespace molsync::sim
