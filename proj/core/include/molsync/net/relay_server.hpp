#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include <boost/asio/io_context.hpp>

#include "molsync/protocol/result.hpp"
#include "molsync/relay/outbound_queue.hpp"
#include "molsync/relay/relay.hpp"

namespace molsync::net {

inline constexpr std::uint16_t kDefaultPort = 9473;
inline constexpr std::size_t kMaxFrameBytes = 1 << 20;

struct RelayServerOptions {
  std::string bind = "127.0.0.1";
  std::uint16_t port = kDefaultPort;  // 0 picks an ephemeral port
  relay::RelayConfig relay;
  std::size_t queue_capacity = relay::kDefaultQueueCapacity;
  std::size_t max_frame_bytes = kMaxFrameBytes;
  std::chrono::seconds idle_timeout{30};
};

namespace detail {
struct ServerState;
}

// HTTP listener: GET /ws upgrades to the frame protocol, GET /healthz answers
// "ok", anything else is 404. Every handler runs on the io_context passed in,
// so the relay core is only ever touched from that thread.
class RelayServer {
 public:
  RelayServer(boost::asio::io_context& io, RelayServerOptions options);
  ~RelayServer();
  RelayServer(const RelayServer&) = delete;
  RelayServer& operator=(const RelayServer&) = delete;

  // Binds and starts accepting. Returns the bound port.
  Result<std::uint16_t, std::string> start();
  void stop();

  std::uint16_t port() const noexcept;
  std::size_t connection_count() const noexcept;
  const relay::Relay& relay() const noexcept;
  std::uint64_t queue_drops() const noexcept;

 private:
  std::shared_ptr<detail::ServerState> impl_;
};

}  // namespace molsync::net
