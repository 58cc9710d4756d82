#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "molsync/peer/script_runner.hpp"
#include "molsync/peer/session.hpp"
#include "molsync/peer/transcript.hpp"
#include "molsync/relay/relay.hpp"
#include "molsync/sim/net_profile.hpp"
#include "molsync/sim/report.hpp"
#include "molsync/sim/scenario.hpp"

namespace molsync::sim {

struct SimOptions {
  std::uint64_t max_events = 5'000'000;
  double convergence_tolerance = 1e-9;
};

// One frame crossing one hop.
struct WireRecord {
  std::int64_t sent_ms = 0;
  std::int64_t delivered_ms = 0;  // meaningless when lost
  int peer = 0;                   // the peer end of the hop
  bool to_relay = false;
  Kind kind = Kind::error;
  std::size_t bytes = 0;
  bool lost = false;
  std::string frame;
};

// Deterministic discrete-event run of one scenario: N peer sessions and an
// in-process relay joined by simulated links. Single-threaded; 1 ms clock.
class Simulation {
 public:
  Simulation(Scenario scenario, NetProfile profile, SimOptions options = {});
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  Result<ScenarioReport, SimError> run();

  std::size_t peer_count() const noexcept;
  int index_of(std::string_view name) const;
  const peer::PeerSession& session(std::size_t i) const;
  const peer::Transcript& transcript(std::size_t i) const;
  const relay::Relay& relay() const noexcept;
  const std::vector<WireRecord>& wire_log() const noexcept;
  std::int64_t script_start_ms() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Result<ScenarioReport, SimError> run_scenario(const Scenario& scenario, const NetProfile& profile,
                                              SimOptions options = {});

// One report per profile. Cells run concurrently with isolated state; a failed
// cell records its error and the sweep continues.
Result<std::vector<SweepRow>, SimError> sweep(std::span<const NetProfile> profiles,
                                              const Scenario& scenario, SimOptions options = {});

}  // namespace molsync::sim
