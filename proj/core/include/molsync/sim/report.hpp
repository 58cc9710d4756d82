#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molsync/protocol/camera.hpp"
#include "molsync/sim/net_profile.hpp"

namespace molsync::sim {

struct LatencySummary {
  std::size_t count = 0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;

  static LatencySummary of(std::vector<double> samples);  // nearest-rank percentiles
  bool operator==(const LatencySummary&) const = default;
};

struct PeerReport {
  std::string name;
  std::string id;
  bool hub = false;
  bool connected = true;
  Camera camera;
  std::vector<std::string> command_log;
  LatencySummary latency;
  std::uint64_t applied = 0;
  std::uint64_t rejected = 0;
  std::uint64_t re_shared = 0;
  std::uint64_t chats_received = 0;
  std::uint64_t files_received = 0;
  std::uint64_t decode_errors = 0;
};

struct ScenarioReport {
  NetProfile profile;
  bool converged = false;
  std::optional<std::int64_t> convergence_time_ms;
  LatencySummary latency;
  std::vector<PeerReport> peers;
  std::map<std::string, std::uint64_t> delivered_to_peers;  // per kind
  std::map<std::string, std::uint64_t> lost;                // per kind
  std::map<std::string, std::uint64_t> max_frame_bytes;     // per kind
  std::uint64_t frames_on_wire = 0;  // delivered, both hop directions
  std::uint64_t bytes_on_wire = 0;
  std::uint64_t relay_drops = 0;
  bool text_only = true;
  std::int64_t end_time_ms = 0;
  std::uint64_t events = 0;
};

struct SimError {
  std::string message;
  std::vector<std::string> undelivered;
};

// Structured report, byte-identical for identical runs.
std::string report_json(const ScenarioReport& report);

struct SweepRow {
  NetProfile profile;
  std::optional<ScenarioReport> report;
  std::optional<SimError> error;
};

std::string sweep_table(std::span<const SweepRow> rows);
std::string sweep_json(std::span<const SweepRow> rows);

}  // namespace molsync::sim
