#include "molsync/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <stdexcept>

namespace molsync::sim {
namespace {

enum class EventType { to_relay, to_peer, relay_close, action, timer };

struct Event {
  std::int64_t time = 0;
  std::uint64_t order = 0;
  EventType type = EventType::timer;
  int peer = 0;
  std::size_t wire = 0;  // index into the wire log for frame events

  bool operator>(const Event& other) const {
    return time != other.time ? time > other.time : order > other.order;
  }
};

// Bytes for send_file. "random:<size>:<seed>" generates seeded content,
// anything else is a path relative to the scenario directory.
peer::FileLoader make_loader(const std::filesystem::path& base_dir) {
  return [base_dir](const std::string& path) -> std::optional<Bytes> {
    if (path.starts_with("random:")) {
      const std::size_t colon = path.find(':', 7);
      if (colon == std::string::npos) return std::nullopt;
      try {
        const std::size_t size = std::stoull(path.substr(7, colon - 7));
        IdRng rng(std::stoull(path.substr(colon + 1)));
        Bytes out(size);
        for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 0xFF);
        return out;
      } catch (const std::exception&) {
        return std::nullopt;
      }
    }
    const std::filesystem::path p(path);
    return peer::read_file((p.is_absolute() ? p : base_dir / p).string());
  };
}

bool cameras_close(const Camera& a, const Camera& b, double tol) {
  auto close = [tol](double x, double y) { return std::abs(x - y) <= tol; };
  return close(a.orientation.w, b.orientation.w) && close(a.orientation.x, b.orientation.x) &&
         close(a.orientation.y, b.orientation.y) && close(a.orientation.z, b.orientation.z) &&
         close(a.zoom, b.zoom) && close(a.center.x, b.center.x) && close(a.center.y, b.center.y) &&
         close(a.center.z, b.center.z);
}

}  // namespace

struct Simulation::Impl {
  struct Peer {
    PeerSpec spec;
    peer::PeerSession session;
    peer::Transcript transcript;
    std::optional<peer::ScriptRunner> runner;
    relay::ConnectionId connection;
    bool open = true;
    std::optional<std::int64_t> armed_timer;
    std::vector<double> latencies;
  };

  Scenario scenario;
  NetProfile profile;
  SimOptions options;
  relay::Relay relay;
  std::vector<Peer> peers;
  std::map<std::string, PeerId> ids;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::vector<WireRecord> wire;
  IdRng net_rng;
  std::uniform_real_distribution<double> unit{0.0, 1.0};
  std::vector<std::int64_t> fifo_up;
  std::vector<std::int64_t> fifo_down;
  std::uint64_t order = 0;
  std::uint64_t events = 0;
  std::int64_t now = 0;
  std::int64_t script_start = 0;
  std::map<std::pair<PeerId, std::uint64_t>, std::int64_t> emitted_at;
  std::int64_t last_update_sent = -1;
  std::int64_t last_update_applied = -1;

  Impl(Scenario s, NetProfile p, SimOptions o)
      : scenario(std::move(s)),
        profile(p),
        options(o),
        relay(relay::RelayConfig{relay::kDefaultMaxPeers, p.seed, 1 << 20}),
        net_rng(p.seed ^ 0x9E3779B97F4A7C15ULL) {
    std::uint64_t i = 0;
    for (const PeerSpec& spec : scenario.peers) {
      peer::SessionOptions so;
      so.policy = spec.policy;
      so.hub = spec.hub;
      so.max_rate = scenario.max_rate;
      so.token_seed = p.seed * 1000003ULL + i;
      peers.push_back(Peer{spec, peer::PeerSession(so), {}, std::nullopt, relay::ConnectionId{i + 1}, true,
                           std::nullopt, {}});
      ++i;
    }
    fifo_up.assign(peers.size(), 0);
    fifo_down.assign(peers.size(), 0);
  }

  void push(EventType type, std::int64_t time, int peer, std::size_t wire_index = 0) {
    queue.push(Event{time, order++, type, peer, wire_index});
  }

  // Samples loss and delay for one hop and queues its delivery.
  void transmit(int peer, bool to_relay, std::string frame, Kind kind) {
    WireRecord rec{now, now, peer, to_relay, kind, frame.size(), false, std::move(frame)};
    const bool lossy = profile.uniform_loss || is_snapshot(kind);
    if (lossy && profile.loss_rate > 0.0 && unit(net_rng) < profile.loss_rate) {
      rec.lost = true;
      wire.push_back(std::move(rec));
      return;
    }
    double delay = profile.latency_ms;
    if (profile.jitter_ms > 0.0) delay += (2.0 * unit(net_rng) - 1.0) * profile.jitter_ms;
    std::int64_t at = now + std::max<std::int64_t>(0, std::llround(delay));
    std::int64_t& fifo = to_relay ? fifo_up[peer] : fifo_down[peer];
    if (!(profile.reorder && is_snapshot(kind))) {
      at = std::max(at, fifo);
      fifo = at;
    }
    rec.delivered_ms = at;
    wire.push_back(std::move(rec));
    push(to_relay ? EventType::to_relay : EventType::to_peer, at, peer, wire.size() - 1);
  }

  void send_from_peer(int i, const std::vector<peer::Outgoing>& out) {
    Peer& p = peers[i];
    for (const peer::Outgoing& o : out) {
      p.transcript.sent(now, o.envelope, o.frame.size());
      if (is_view_update(o.envelope.kind()) && forwarded(o.envelope) == nullptr && o.envelope.from.is_peer()) {
        emitted_at[{o.envelope.from.peer(), o.envelope.seq}] = now;
        last_update_sent = std::max(last_update_sent, now);
      }
      if (p.open) transmit(i, true, o.frame, o.envelope.kind());
    }
  }

  int peer_of(relay::ConnectionId c) const { return static_cast<int>(c.value - 1); }

  void send_from_relay(const std::vector<relay::Outbound>& out) {
    for (const relay::Outbound& o : out) {
      const int i = peer_of(o.connection);
      if (peers[i].open) transmit(i, false, o.frame, o.kind);
    }
  }

  void arm_timer(int i) {
    Peer& p = peers[i];
    auto deadline = p.session.next_deadline();
    if (!deadline) return;
    const std::int64_t at = std::max(*deadline, now);
    if (p.armed_timer && *p.armed_timer == at) return;
    p.armed_timer = at;
    push(EventType::timer, at, i);
  }

  void arm_action(int i) {
    Peer& p = peers[i];
    if (p.runner && p.open) {
      if (auto due = p.runner->next_due()) push(EventType::action, *due, i);
    }
  }

  void deliver_to_peer(int i, const WireRecord& rec) {
    Peer& p = peers[i];
    if (!p.open) return;
    auto decoded = decode_envelope(rec.frame);
    if (!decoded) {
      p.session.on_frame(rec.frame, now);
      p.transcript.error(now, "decode", std::string(decode_error_name(decoded.error().code)));
      return;
    }
    const Envelope& e = decoded.value();
    auto outcome = p.session.on_receive(e, now, rec.frame.size());
    p.transcript.received(now, e, rec.frame.size(), outcome.applied ? "applied" : "");
    if (outcome.applied) {
      last_update_applied = std::max(last_update_applied, now);
      if (auto key = update_key(e)) {
        if (auto it = emitted_at.find({key->origin, key->seq}); it != emitted_at.end()) {
          p.latencies.push_back(static_cast<double>(now - it->second));
        }
      }
    }
    send_from_peer(i, outcome.out);
    arm_timer(i);
  }

  void run_action(int i) {
    Peer& p = peers[i];
    if (!p.open || !p.runner) return;
    auto due = p.runner->next_due();
    if (!due || *due > now) return;
    auto step = p.runner->step(p.session, now, p.transcript);
    send_from_peer(i, step.out);
    if (step.disconnect) {
      p.session.on_disconnected();
      // The relay notices after the frames already in flight.
      const std::int64_t at = std::max<std::int64_t>(now + std::llround(profile.latency_ms), fifo_up[i]);
      fifo_up[i] = at;
      push(EventType::relay_close, at, i);
      p.open = false;
      return;
    }
    arm_timer(i);
    arm_action(i);
  }

  std::optional<SimError> drain() {
    while (!queue.empty()) {
      if (++events > options.max_events) {
        SimError err{"event budget of " + std::to_string(options.max_events) + " exhausted at t=" +
                         std::to_string(now) + " ms",
                     {}};
        while (!queue.empty() && err.undelivered.size() < 32) {
          const Event ev = queue.top();
          queue.pop();
          if (ev.type == EventType::to_relay || ev.type == EventType::to_peer) {
            const WireRecord& w = wire[ev.wire];
            err.undelivered.push_back(std::string(kind_name(w.kind)) + " " +
                                      (w.to_relay ? peers[w.peer].spec.name + " -> relay"
                                                  : "relay -> " + peers[w.peer].spec.name) +
                                      " due t=" + std::to_string(ev.time));
          }
        }
        return err;
      }
      const Event ev = queue.top();
      queue.pop();
      now = ev.time;
      switch (ev.type) {
        case EventType::to_relay: {
          const WireRecord& w = wire[ev.wire];
          auto reaction = relay.on_frame(peers[w.peer].connection, w.frame, now);
          send_from_relay(reaction.out);
          break;
        }
        case EventType::to_peer:
          deliver_to_peer(ev.peer, wire[ev.wire]);
          break;
        case EventType::relay_close:
          send_from_relay(relay.on_close(peers[ev.peer].connection));
          break;
        case EventType::action:
          run_action(ev.peer);
          break;
        case EventType::timer: {
          Peer& p = peers[ev.peer];
          if (p.armed_timer == ev.time) p.armed_timer.reset();
          if (!p.open) break;
          send_from_peer(ev.peer, p.session.poll(now));
          arm_timer(ev.peer);
          break;
        }
      }
    }
    return std::nullopt;
  }

  Result<ScenarioReport, SimError> run() {
    if (auto err = scenario.validate(); !err.empty()) return SimError{err, {}};
    if (auto err = profile.validate(); !err.empty()) return SimError{err, {}};

    for (std::size_t i = 0; i < peers.size(); ++i) {
      send_from_peer(static_cast<int>(i), {peers[i].session.hello(now)});
    }
    if (auto err = drain()) return *err;
    for (const Peer& p : peers) {
      if (!p.session.id()) return SimError{"peer " + p.spec.name + " was not assigned an id", {}};
      ids.emplace(p.spec.name, *p.session.id());
    }

    for (const auto& [from, to] : scenario.links) {
      const int i = index_of(from);
      auto req = peers[i].session.request_connect(ids.at(to), now);
      if (!req) return SimError{"connect " + from + " -> " + to + " failed", {}};
      send_from_peer(i, {req.value()});
    }
    if (auto err = drain()) return *err;
    for (const auto& [from, to] : scenario.links) {
      if (!peers[index_of(from)].session.links().contains(ids.at(to))) {
        return SimError{"link " + from + " -> " + to + " was not established", {}};
      }
    }

    script_start = now;
    auto resolver = [this](std::string_view name) -> std::optional<PeerId> {
      auto it = ids.find(std::string(name));
      if (it == ids.end()) return std::nullopt;
      return it->second;
    };
    for (std::size_t i = 0; i < peers.size(); ++i) {
      peers[i].runner.emplace(peers[i].spec.script, script_start, resolver,
                              make_loader(scenario.base_dir));
      arm_action(static_cast<int>(i));
    }
    if (auto err = drain()) return *err;
    return report();
  }

  int index_of(std::string_view name) const {
    for (std::size_t i = 0; i < peers.size(); ++i) {
      if (peers[i].spec.name == name) return static_cast<int>(i);
    }
    return -1;
  }

  ScenarioReport report() const {
    ScenarioReport r;
    r.profile = profile;
    r.end_time_ms = now;
    r.events = events;
    r.relay_drops = relay.drops_total();

    std::vector<double> all;
    for (const Peer& p : peers) {
      PeerReport pr;
      pr.name = p.spec.name;
      pr.id = p.session.id() ? p.session.id()->str() : ids.count(p.spec.name) ? ids.at(p.spec.name).str() : "";
      pr.hub = p.spec.hub;
      pr.connected = p.open;
      pr.camera = p.session.model().camera();
      pr.command_log = p.session.model().command_log();
      pr.latency = LatencySummary::of(p.latencies);
      const auto& st = p.session.stats();
      pr.applied = st.applied;
      pr.rejected = st.rejected;
      pr.re_shared = st.re_shared;
      pr.chats_received = st.received_of(Kind::chat).frames;
      pr.files_received = p.session.received_files().size();
      pr.decode_errors = st.decode_errors;
      all.insert(all.end(), p.latencies.begin(), p.latencies.end());
      r.peers.push_back(std::move(pr));
    }
    r.latency = LatencySummary::of(std::move(all));

    for (const WireRecord& w : wire) {
      const std::string kind(kind_name(w.kind));
      auto& mx = r.max_frame_bytes[kind];
      mx = std::max<std::uint64_t>(mx, w.bytes);
      if (!is_valid_utf8(w.frame)) r.text_only = false;
      if (w.lost) {
        ++r.lost[kind];
        continue;
      }
      ++r.frames_on_wire;
      r.bytes_on_wire += w.bytes;
      if (!w.to_relay) ++r.delivered_to_peers[kind];
    }

    r.converged = true;
    const PeerReport* first = nullptr;
    for (const PeerReport& pr : r.peers) {
      if (!pr.connected) continue;
      if (!first) {
        first = &pr;
        continue;
      }
      if (!cameras_close(first->camera, pr.camera, options.convergence_tolerance) ||
          first->command_log != pr.command_log) {
        r.converged = false;
      }
    }
    if (r.converged) {
      r.convergence_time_ms =
          last_update_sent < 0 ? 0 : std::max<std::int64_t>(0, last_update_applied - last_update_sent);
    }
    return r;
  }
};

Simulation::Simulation(Scenario scenario, NetProfile profile, SimOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), profile, options)) {}

Simulation::~Simulation() = default;

Result<ScenarioReport, SimError> Simulation::run() { return impl_->run(); }

std::size_t Simulation::peer_count() const noexcept { return impl_->peers.size(); }
int Simulation::index_of(std::string_view name) const { return impl_->index_of(name); }
const peer::PeerSession& Simulation::session(std::size_t i) const { return impl_->peers.at(i).session; }
const peer::Transcript& Simulation::transcript(std::size_t i) const { return impl_->peers.at(i).transcript; }
const relay::Relay& Simulation::relay() const noexcept { return impl_->relay; }
const std::vector<WireRecord>& Simulation::wire_log() const noexcept { return impl_->wire; }
std::int64_t Simulation::script_start_ms() const noexcept { return impl_->script_start; }

Result<ScenarioReport, SimError> run_scenario(const Scenario& scenario, const NetProfile& profile,
                                              SimOptions options) {
  Simulation sim(scenario, profile, options);
  return sim.run();
}

Result<std::vector<SweepRow>, SimError> sweep(std::span<const NetProfile> profiles,
                                              const Scenario& scenario, SimOptions options) {
  if (profiles.empty()) return SimError{"sweep needs at least one profile", {}};
  std::vector<std::future<Result<ScenarioReport, SimError>>> cells;
  cells.reserve(profiles.size());
  for (const NetProfile& p : profiles) {
    cells.push_back(std::async(std::launch::async, [&scenario, p, options] {
      return run_scenario(scenario, p, options);
    }));
  }
  std::vector<SweepRow> rows;
  rows.reserve(profiles.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto result = cells[i].get();
    SweepRow row{profiles[i], std::nullopt, std::nullopt};
    if (result) row.report = std::move(result).value();
    else row.error = std::move(result).error();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace molsync::sim
