#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "molsync/net/peer_client.hpp"
#include "molsync/peer/session.hpp"

namespace {

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace molsync;

  CLI::App app{"molsync peer: joins a relay, runs an action script and prints a JSONL transcript"};
  std::string server = "ws://127.0.0.1:9473/ws";
  std::string master;
  std::string script_path;
  std::string policy_text;
  std::string staging_dir;
  bool hub = false;
  double max_rate = kDefaultMaxRate;
  std::int64_t linger_ms = 500;
  std::int64_t timeout_ms = 5000;

  app.add_option("--server", server, "Relay websocket URL")->envname("MOLSYNC_SERVER")->capture_default_str();
  app.add_option("--master", master, "Peer ID to link with after joining");
  app.add_option("--script", script_path, "Action script; without one the peer just listens")
      ->check(CLI::ExistingFile);
  app.add_flag("--hub", hub, "Re-share applied view updates with the other links");
  app.add_option("--policy", policy_text, "Send/apply switches as r,s,c/r,s,c (1 or 0 each)");
  app.add_option("--max-rate", max_rate, "Rotation/state updates per second")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--staging-dir", staging_dir, "Directory for received files (created if missing)");
  app.add_option("--linger-ms", linger_ms, "Keep receiving this long after the last action")
      ->capture_default_str();
  app.add_option("--timeout-ms", timeout_ms, "Join/link timeout")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  peer::SessionOptions options;
  options.hub = hub;
  options.max_rate = max_rate;
  options.staging_dir = staging_dir;
  if (!policy_text.empty()) {
    auto policy = Policy::parse(policy_text);
    if (!policy) {
      std::cerr << "bad --policy: '" << policy_text << "', expected r,s,c/r,s,c with 0 or 1 each\n";
      return 2;
    }
    options.policy = *policy;
  }

  std::optional<PeerId> master_id;
  if (!master.empty()) {
    master_id = PeerId::parse(master);
    if (!master_id) {
      std::cerr << "bad --master: '" << master << "' is not a peer ID\n";
      return 2;
    }
  }

  peer::ActionScript script;
  if (!script_path.empty()) {
    auto text = slurp(script_path);
    if (!text) {
      std::cerr << "cannot read " << script_path << '\n';
      return 2;
    }
    auto parsed = peer::parse_action_script(*text);
    if (!parsed) {
      std::cerr << script_path << ":" << parsed.error().line << ": " << parsed.error().message << '\n';
      return 2;
    }
    script = std::move(parsed).value();
  }

  auto transport = net::WebSocketTransport::connect(server);
  if (!transport) {
    std::cerr << transport.error() << '\n';
    return 1;
  }
  net::SystemClock clock;
  peer::PeerSession session(options);
  peer::Transcript setup;
  auto joined = peer::connect(session, *transport.value(), clock, master_id, timeout_ms, &setup);
  setup.write_jsonl(std::cout);
  if (!joined) {
    std::cerr << peer::session_error_name(joined.error().code) << ": " << joined.error().detail << '\n';
    return 1;
  }
  std::cerr << "id " << session.id()->str() << '\n';

  peer::RunOptions run;
  run.linger_ms = linger_ms;
  const peer::Transcript transcript = peer::run_script(session, script, clock, *transport.value(), run);
  transcript.write_jsonl(std::cout);
  return EXIT_SUCCESS;
}
