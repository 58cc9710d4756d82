#include "molsync/peer/action_script.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace molsync::peer {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits off the first whitespace-delimited token.
std::string_view next_token(std::string_view& rest) {
  rest = trim(rest);
  std::size_t end = rest.find_first_of(" \t");
  std::string_view token = rest.substr(0, end);
  rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  return token;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
  if (token.empty()) return false;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Formatter {
  std::string operator()(const ConnectTo& a) const { return a.target; }
  std::string operator()(const SetPolicy& a) const { return a.policy.to_string(); }
  std::string operator()(const Drag& a) const {
    const Quaternion& q = a.orientation;
    return fmt(q.w) + " " + fmt(q.x) + " " + fmt(q.y) + " " + fmt(q.z);
  }
  std::string operator()(const Rotate& a) const {
    return fmt(a.axis[0]) + " " + fmt(a.axis[1]) + " " + fmt(a.axis[2]) + " " + fmt(a.degrees);
  }
  std::string operator()(const SetZoom& a) const { return fmt(a.zoom); }
  std::string operator()(const SendCommand& a) const { return a.script; }
  std::string operator()(const SendChat& a) const { return a.text; }
  std::string operator()(const SendFile& a) const { return a.path; }
  std::string operator()(const Disconnect&) const { return {}; }
};

}  // namespace

std::string_view verb_name(const ActionBody& body) noexcept {
  static constexpr std::string_view names[] = {"connect", "policy",  "drag",      "rotate",    "zoom",
                                               "command", "chat",    "send_file", "disconnect"};
  return names[body.index()];
}

Result<ActionScript, ScriptError> parse_action_script(std::string_view text) {
  ActionScript script;
  std::size_t line_no = 0;
  std::int64_t last_at = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;

    auto error = [&](std::string message) { return ScriptError{line_no, std::move(message)}; };

    std::string_view rest = line;
    std::int64_t at_ms = 0;
    if (!parse_number(next_token(rest), at_ms) || at_ms < 0) {
      return error("expected a non-negative time in ms");
    }
    if (at_ms < last_at) return error("timestamps must be non-decreasing");
    last_at = at_ms;

    const std::string_view verb = next_token(rest);
    const std::string_view args = trim(rest);

    auto numbers = [&](std::size_t n) -> std::optional<std::vector<double>> {
      std::string_view r = args;
      std::vector<double> v(n);
      for (double& x : v) {
        if (!parse_number(next_token(r), x) || !std::isfinite(x)) return std::nullopt;
      }
      if (!trim(r).empty()) return std::nullopt;
      return v;
    };

    ActionBody body;
    if (verb == "connect") {
      if (args.empty() || args.find_first_of(" \t") != std::string_view::npos) {
        return error("connect takes one peer");
      }
      body = ConnectTo{std::string(args)};
    } else if (verb == "policy") {
      auto p = Policy::parse(args);
      if (!p) return error("policy must look like 1,1,1/1,1,1");
      body = SetPolicy{*p};
    } else if (verb == "drag") {
      auto v = numbers(4);
      if (!v) return error("drag takes w x y z");
      const Quaternion q{(*v)[0], (*v)[1], (*v)[2], (*v)[3]};
      if (!(q.norm() > 0.0)) return error("drag orientation must be non-zero");
      body = Drag{q.normalized()};
    } else if (verb == "rotate") {
      auto v = numbers(4);
      if (!v) return error("rotate takes ax ay az degrees");
      if ((*v)[0] == 0.0 && (*v)[1] == 0.0 && (*v)[2] == 0.0) return error("rotate axis must be non-zero");
      body = Rotate{{(*v)[0], (*v)[1], (*v)[2]}, (*v)[3]};
    } else if (verb == "zoom") {
      auto v = numbers(1);
      if (!v || !((*v)[0] > 0.0)) return error("zoom takes one positive number");
      body = SetZoom{(*v)[0]};
    } else if (verb == "command") {
      if (args.empty()) return error("command needs a script");
      body = SendCommand{std::string(args)};
    } else if (verb == "chat") {
      if (args.empty()) return error("chat needs text");
      body = SendChat{std::string(args)};
    } else if (verb == "send_file") {
      if (args.empty()) return error("send_file needs a path");
      body = SendFile{std::string(args)};
    } else if (verb == "disconnect") {
      if (!args.empty()) return error("disconnect takes no arguments");
      body = Disconnect{};
    } else {
      return error("unknown verb '" + std::string(verb) + "'");
    }
    script.actions.push_back(Action{at_ms, std::move(body)});
  }
  return script;
}

std::string format_action(const Action& action) {
  std::string args = std::visit(Formatter{}, action.body);
  std::string line = std::to_string(action.at_ms) + " " + std::string(verb_name(action.body));
  if (!args.empty()) line += " " + args;
  return line;
}

}  // namespace molsync::peer
