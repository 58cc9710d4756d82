#include <csignal>
#include <cstdlib>

#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>
#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "molsync/net/relay_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"molsync relay: assigns peer IDs and forwards frames along peer links"};
  molsync::net::RelayServerOptions options;
  std::uint64_t id_seed = 0;
  std::string log_level = "info";
  unsigned idle_seconds = 30;

  app.add_option("--bind", options.bind, "Listen address")->envname("MOLSYNC_BIND")->capture_default_str();
  app.add_option("--port", options.port, "Listen port, 0 for ephemeral")
      ->envname("MOLSYNC_PORT")
      ->capture_default_str();
  app.add_option("--max-peers", options.relay.max_peers, "Registered peer limit")
      ->envname("MOLSYNC_MAX_PEERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* seed_opt = app.add_option("--id-seed", id_seed, "Seed peer ID generation (tests only)")
                       ->envname("MOLSYNC_ID_SEED");
  app.add_option("--queue", options.queue_capacity, "Per-connection outbound queue length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--idle-timeout", idle_seconds, "Seconds without traffic before a ping/close")
      ->capture_default_str();
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")
      ->envname("MOLSYNC_LOG_LEVEL")
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::from_str(log_level));
  if (*seed_opt) options.relay.id_seed = id_seed;
  options.idle_timeout = std::chrono::seconds(idle_seconds);

  boost::asio::io_context io;
  molsync::net::RelayServer server(io, options);
  auto port = server.start();
  if (!port) {
    spdlog::error("{}", port.error());
    return EXIT_FAILURE;
  }
  spdlog::info("listening on ws://{}:{}/ws", options.bind, port.value());

  boost::asio::signal_set signals(io, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int signal) {
    spdlog::info("signal {}: shutting down ({} peers registered, {} frames dropped)", signal,
                 server.relay().registry().size(), server.relay().drops_total());
    server.stop();
    io.stop();
  });
  io.run();
  return EXIT_SUCCESS;
}
