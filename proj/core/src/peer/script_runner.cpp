#include "molsync/peer/script_runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

namespace molsync::peer {

std::optional<Bytes> read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  Bytes out((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (is.bad()) return std::nullopt;
  return out;
}

ScriptRunner::ScriptRunner(ActionScript script, std::int64_t start_ms, PeerResolver resolver,
                           FileLoader loader)
    : script_(std::move(script)),
      start_ms_(start_ms),
      resolver_(std::move(resolver)),
      loader_(loader ? std::move(loader) : FileLoader(read_file)) {}

std::optional<std::int64_t> ScriptRunner::next_due() const {
  if (done()) return std::nullopt;
  return start_ms_ + script_.actions[next_].at_ms;
}

std::int64_t ScriptRunner::end_ms() const {
  return script_.actions.empty() ? start_ms_ : start_ms_ + script_.actions.back().at_ms;
}

ScriptRunner::Step ScriptRunner::step(PeerSession& session, std::int64_t now_ms,
                                      Transcript& transcript) {
  Step step;
  auto append = [&](std::vector<Outgoing> out) {
    std::move(out.begin(), out.end(), std::back_inserter(step.out));
  };
  auto fail = [&](std::string_view what, std::string detail) {
    transcript.error(now_ms, what, std::move(detail));
  };

  while (!done() && start_ms_ + script_.actions[next_].at_ms <= now_ms) {
    const Action& action = script_.actions[next_++];
    const std::string_view verb = verb_name(action.body);
    transcript.action(now_ms, verb, format_action(action));

    if (const auto* a = std::get_if<ConnectTo>(&action.body)) {
      std::optional<PeerId> target = resolver_ ? resolver_(a->target) : std::nullopt;
      if (!target) target = PeerId::parse(a->target);
      if (!target) {
        fail(verb, "cannot resolve peer '" + a->target + "'");
        continue;
      }
      auto req = session.request_connect(*target, now_ms);
      if (req) {
        step.out.push_back(std::move(req).value());
      } else {
        fail(verb, std::string(session_error_name(req.error().code)));
      }
    } else if (const auto* a = std::get_if<SetPolicy>(&action.body)) {
      if (auto hello = session.set_policy(a->policy, now_ms)) step.out.push_back(std::move(*hello));
    } else if (const auto* a = std::get_if<Drag>(&action.body)) {
      append(session.local_drag(a->orientation, now_ms));
    } else if (const auto* a = std::get_if<Rotate>(&action.body)) {
      const Quaternion delta = from_axis_angle(a->axis, a->degrees * std::numbers::pi / 180.0);
      append(session.local_drag(compose_rotation(session.model().camera().orientation, delta), now_ms));
    } else if (const auto* a = std::get_if<SetZoom>(&action.body)) {
      append(session.set_zoom(a->zoom, now_ms));
    } else if (const auto* a = std::get_if<SendCommand>(&action.body)) {
      auto r = session.send_command(a->script, now_ms);
      if (r) append(std::move(r).value());
      else fail(verb, std::string(session_error_name(r.error().code)) + ": " + r.error().detail);
    } else if (const auto* a = std::get_if<SendChat>(&action.body)) {
      auto r = session.send_chat(a->text, now_ms);
      if (r) append(std::move(r).value());
      else fail(verb, std::string(session_error_name(r.error().code)) + ": " + r.error().detail);
    } else if (const auto* a = std::get_if<SendFile>(&action.body)) {
      auto bytes = loader_(a->path);
      if (!bytes) {
        fail(verb, "cannot read '" + a->path + "'");
        continue;
      }
      const std::string name = a->path.substr(a->path.find_last_of("/\\") + 1);
      auto r = session.send_file(*bytes, name, now_ms);
      if (r) append(std::move(r).value());
      else fail(verb, std::string(session_error_name(r.error().code)) + ": " + r.error().detail);
    } else if (std::holds_alternative<Disconnect>(action.body)) {
      step.disconnect = true;
      next_ = script_.actions.size();
    }
  }
  return step;
}

namespace {

void send_all(Transport& transport, Transcript* transcript, std::int64_t now_ms,
              const std::vector<Outgoing>& out) {
  for (const Outgoing& o : out) {
    transport.send(o.frame);
    if (transcript) transcript->sent(now_ms, o.envelope, o.frame.size());
  }
}

// Receives one frame and feeds it to the session. Returns false when the
// deadline passed without a frame.
bool receive_one(PeerSession& session, Transport& transport, Clock& clock, std::int64_t deadline,
                 Transcript* transcript, ReceiveOutcome& outcome) {
  auto frame = transport.receive(deadline, clock);
  if (!frame) return false;
  const std::int64_t now = clock.now_ms();
  auto decoded = decode_envelope(*frame);
  if (!decoded) {
    outcome = session.on_frame(*frame, now);
    if (transcript) {
      transcript->error(now, "decode", std::string(decode_error_name(decoded.error().code)));
    }
    return true;
  }
  outcome = session.on_receive(decoded.value(), now, frame->size());
  if (transcript) transcript->received(now, decoded.value(), frame->size(), outcome.applied ? "applied" : "");
  send_all(transport, transcript, now, outcome.out);
  return true;
}

}  // namespace

Result<void, SessionError> connect(PeerSession& session, Transport& transport, Clock& clock,
                                   const std::optional<PeerId>& master, std::int64_t timeout_ms,
                                   Transcript* transcript) {
  auto wait_until = [&](auto&& satisfied, std::string_view what) -> Result<void, SessionError> {
    const std::int64_t deadline = clock.now_ms() + timeout_ms;
    while (!satisfied()) {
      if (!transport.is_open()) return SessionError{SessionErrorCode::transport, "connection closed"};
      ReceiveOutcome outcome;
      if (!receive_one(session, transport, clock, deadline, transcript, outcome)) {
        if (clock.now_ms() >= deadline) {
          return SessionError{SessionErrorCode::transport, "timed out waiting for " + std::string(what)};
        }
        continue;
      }
      if (outcome.error) {
        if (outcome.error->code == "peer_not_found") {
          return SessionError{SessionErrorCode::peer_not_found, outcome.error->message};
        }
        return SessionError{SessionErrorCode::transport, outcome.error->code + ": " + outcome.error->message};
      }
    }
    return outcome::success();
  };

  const Outgoing hello = session.hello(clock.now_ms());
  send_all(transport, transcript, clock.now_ms(), {hello});
  if (auto r = wait_until([&] { return session.connected(); }, "welcome"); !r) return r;
  if (!master) return outcome::success();

  auto req = session.request_connect(*master, clock.now_ms());
  if (!req) return req.error();
  send_all(transport, transcript, clock.now_ms(), {req.value()});
  return wait_until([&] { return session.links().contains(*master); }, "connect_ok");
}

Transcript run_script(PeerSession& session, const ActionScript& script, Clock& clock,
                      Transport& transport, RunOptions options) {
  Transcript transcript;
  ScriptRunner runner(script, clock.now_ms(), options.resolver, options.loader);
  const std::int64_t linger_end = runner.end_ms() + options.linger_ms;

  for (;;) {
    const std::int64_t now = clock.now_ms();
    auto step = runner.step(session, now, transcript);
    send_all(transport, &transcript, now, step.out);
    if (step.disconnect) {
      transport.close();
      session.on_disconnected();
      break;
    }
    send_all(transport, &transcript, now, session.poll(now));

    const auto pending = session.next_deadline();
    if (runner.done() && !pending && now >= linger_end) break;
    if (!transport.is_open()) {
      transcript.error(now, "transport", "connection closed");
      break;
    }
    std::int64_t deadline = runner.done() ? linger_end : *runner.next_due();
    if (pending) deadline = std::min(deadline, *pending);

    ReceiveOutcome outcome;
    receive_one(session, transport, clock, deadline, &transcript, outcome);
  }
  return transcript;
}

}  // namespace molsync::peer
