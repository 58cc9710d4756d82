#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "molsync/peer/script_runner.hpp"
#include "molsync/protocol/result.hpp"

namespace molsync::net {

// Milliseconds since the Unix epoch.
class SystemClock final : public peer::Clock {
 public:
  std::int64_t now_ms() override;
};

struct WsUrl {
  std::string host;
  std::string port;
  std::string target;

  // ws://host[:port][/path]; the path defaults to /ws.
  static Result<WsUrl, std::string> parse(std::string_view url);
};

// Client side of one websocket connection. Not thread-safe; receive() drives
// the private io_context on the calling thread.
class WebSocketTransport final : public peer::Transport {
 public:
  static Result<std::unique_ptr<WebSocketTransport>, std::string> connect(std::string_view url);
  ~WebSocketTransport() override;

  void send(const std::string& frame) override;
  std::optional<std::string> receive(std::int64_t deadline_ms, peer::Clock& clock) override;
  void close() override;
  bool is_open() const override;

 private:
  struct Impl;
  explicit WebSocketTransport(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace molsync::net
