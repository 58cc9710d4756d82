#include "molsync/sim/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace molsync::sim {

using nlohmann::json;

LatencySummary LatencySummary::of(std::vector<double> samples) {
  LatencySummary s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  auto rank = [&](double p) {
    const auto n = static_cast<double>(samples.size());
    const auto idx = static_cast<std::size_t>(std::ceil(p * n));
    return samples[std::clamp<std::size_t>(idx, 1, samples.size()) - 1];
  };
  s.p50_ms = rank(0.50);
  s.p95_ms = rank(0.95);
  s.max_ms = samples.back();
  return s;
}

namespace {

json camera_json(const Camera& c) {
  return {{"orientation", {c.orientation.w, c.orientation.x, c.orientation.y, c.orientation.z}},
          {"zoom", c.zoom},
          {"center", {c.center.x, c.center.y, c.center.z}}};
}

json latency_json(const LatencySummary& l) {
  return {{"count", l.count}, {"p50_ms", l.p50_ms}, {"p95_ms", l.p95_ms}, {"max_ms", l.max_ms}};
}

json profile_json(const NetProfile& p) {
  return {{"latency_ms", p.latency_ms}, {"jitter_ms", p.jitter_ms}, {"loss_rate", p.loss_rate},
          {"reorder", p.reorder},       {"uniform_loss", p.uniform_loss}, {"seed", p.seed}};
}

json to_json(const ScenarioReport& r) {
  json peers = json::array();
  for (const PeerReport& p : r.peers) {
    peers.push_back({{"name", p.name},
                     {"id", p.id},
                     {"hub", p.hub},
                     {"connected", p.connected},
                     {"camera", camera_json(p.camera)},
                     {"command_log", p.command_log},
                     {"latency", latency_json(p.latency)},
                     {"applied", p.applied},
                     {"rejected", p.rejected},
                     {"re_shared", p.re_shared},
                     {"chats_received", p.chats_received},
                     {"files_received", p.files_received},
                     {"decode_errors", p.decode_errors}});
  }
  json j = {{"profile", profile_json(r.profile)},
            {"converged", r.converged},
            {"latency", latency_json(r.latency)},
            {"peers", std::move(peers)},
            {"delivered_to_peers", r.delivered_to_peers},
            {"lost", r.lost},
            {"max_frame_bytes", r.max_frame_bytes},
            {"frames_on_wire", r.frames_on_wire},
            {"bytes_on_wire", r.bytes_on_wire},
            {"relay_drops", r.relay_drops},
            {"text_only", r.text_only},
            {"end_time_ms", r.end_time_ms},
            {"events", r.events}};
  j["convergence_time_ms"] = r.convergence_time_ms ? json(*r.convergence_time_ms) : json(nullptr);
  return j;
}

}  // namespace

std::string report_json(const ScenarioReport& report) { return to_json(report).dump(2) + "\n"; }

std::string sweep_json(std::span<const SweepRow> rows) {
  json out = json::array();
  for (const SweepRow& row : rows) {
    json cell = {{"profile", profile_json(row.profile)}};
    if (row.report) cell["report"] = to_json(*row.report);
    if (row.error) cell["error"] = {{"message", row.error->message}, {"undelivered", row.error->undelivered}};
    out.push_back(std::move(cell));
  }
  return out.dump(2) + "\n";
}

std::string sweep_table(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << std::left << std::setw(44) << "profile" << std::right << std::setw(10) << "converged"
     << std::setw(12) << "conv_ms" << std::setw(10) << "p50_ms" << std::setw(10) << "p95_ms"
     << std::setw(10) << "max_ms" << std::setw(8) << "lost" << '\n';
  os << std::fixed << std::setprecision(1);
  for (const SweepRow& row : rows) {
    os << std::left << std::setw(44) << row.profile.to_string() << std::right;
    if (!row.report) {
      os << "  error: " << (row.error ? row.error->message : "unknown") << '\n';
      continue;
    }
    const ScenarioReport& r = *row.report;
    std::uint64_t lost = 0;
    for (const auto& [kind, n] : r.lost) lost += n;
    os << std::setw(10) << (r.converged ? "yes" : "no") << std::setw(12)
       << (r.convergence_time_ms ? std::to_string(*r.convergence_time_ms) : "-") << std::setw(10)
       << r.latency.p50_ms << std::setw(10) << r.latency.p95_ms << std::setw(10) << r.latency.max_ms
       << std::setw(8) << lost << '\n';
  }
  return os.str();
}

}  // namespace molsync::sim
