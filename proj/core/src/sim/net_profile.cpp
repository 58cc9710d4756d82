#include "molsync/sim/net_profile.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace molsync::sim {
namespace {

template <class T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

Result<NetProfile, std::string> NetProfile::parse(std::string_view text, const NetProfile& base) {
  NetProfile p = base;
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) continue;

    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) return "expected key=value, got '" + std::string(item) + "'";
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    auto bad = [&] { return "bad value for '" + std::string(key) + "': '" + std::string(value) + "'"; };

    if (key == "lat" || key == "latency") {
      if (!parse_number(value, p.latency_ms)) return bad();
    } else if (key == "jit" || key == "jitter") {
      if (!parse_number(value, p.jitter_ms)) return bad();
    } else if (key == "loss") {
      if (!parse_number(value, p.loss_rate)) return bad();
    } else if (key == "seed") {
      if (!parse_number(value, p.seed)) return bad();
    } else if (key == "reorder" || key == "uniform_loss") {
      if (value != "0" && value != "1") return bad();
      (key == "reorder" ? p.reorder : p.uniform_loss) = value == "1";
    } else {
      return "unknown profile key '" + std::string(key) + "'";
    }
  }
  if (auto err = p.validate(); !err.empty()) return err;
  return p;
}

std::string NetProfile::to_string() const {
  std::string s = "lat=" + fmt(latency_ms) + ",jit=" + fmt(jitter_ms) + ",loss=" + fmt(loss_rate) +
                  ",seed=" + std::to_string(seed);
  if (reorder) s += ",reorder=1";
  if (uniform_loss) s += ",uniform_loss=1";
  return s;
}

std::string NetProfile::validate() const {
  if (!std::isfinite(latency_ms) || latency_ms < 0.0) return "latency must be >= 0";
  if (!std::isfinite(jitter_ms) || jitter_ms < 0.0) return "jitter must be >= 0";
  if (!(loss_rate >= 0.0 && loss_rate < 1.0)) return "loss must be in [0, 1)";
  return {};
}

}  // namespace molsync::sim
