#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molsync/peer/action_script.hpp"
#include "molsync/peer/session.hpp"
#include "molsync/peer/transcript.hpp"

namespace molsync::peer {

// Maps a script's connect target to a peer ID. The default accepts IDs only.
using PeerResolver = std::function<std::optional<PeerId>(std::string_view)>;
using FileLoader = std::function<std::optional<Bytes>(const std::string& path)>;

std::optional<Bytes> read_file(const std::string& path);

// Executes an ActionScript against a session as time advances. Action times
// are offsets from `start_ms`. The driver calls step() whenever its clock
// reaches next_due().
class ScriptRunner {
 public:
  ScriptRunner(ActionScript script, std::int64_t start_ms, PeerResolver resolver = {},
               FileLoader loader = read_file);

  std::optional<std::int64_t> next_due() const;
  bool done() const noexcept { return next_ >= script_.actions.size(); }
  std::int64_t end_ms() const;  // time of the last action

  struct Step {
    std::vector<Outgoing> out;
    bool disconnect = false;
  };

  // Runs every action due at `now_ms`. Action failures are logged to the
  // transcript and execution continues.
  Step step(PeerSession& session, std::int64_t now_ms, Transcript& transcript);

 private:
  ActionScript script_;
  std::int64_t start_ms_;
  PeerResolver resolver_;
  FileLoader loader_;
  std::size_t next_ = 0;
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
};

// Frame transport for run_script. receive() blocks until a frame arrives or
// the clock reaches `deadline_ms`.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const std::string& frame) = 0;
  virtual std::optional<std::string> receive(std::int64_t deadline_ms, Clock& clock) = 0;
  virtual void close() {}
  virtual bool is_open() const { return true; }
};

struct RunOptions {
  std::int64_t linger_ms = 500;  // keep receiving after the last action
  PeerResolver resolver;
  FileLoader loader = read_file;
};

// Hello/welcome handshake, then connect to `master` when given. Waits at most
// `timeout_ms` of clock time for each reply.
Result<void, SessionError> connect(PeerSession& session, Transport& transport, Clock& clock,
                                   const std::optional<PeerId>& master,
                                   std::int64_t timeout_ms = 5000,
                                   Transcript* transcript = nullptr);

// Drives `script` in real or simulated time and records every frame.
Transcript run_script(PeerSession& session, const ActionScript& script, Clock& clock,
                      Transport& transport, RunOptions options = {});

}  // namespace molsync::peer
