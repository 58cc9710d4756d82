#include "molsync/net/peer_client.hpp"

#include <chrono>
#include <deque>

#include <boost/asio/connect.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "molsync/net/relay_server.hpp"

namespace molsync::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::int64_t SystemClock::now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Result<WsUrl, std::string> WsUrl::parse(std::string_view url) {
  constexpr std::string_view scheme = "ws://";
  if (!url.starts_with(scheme)) return std::string("url must start with ws://");
  url.remove_prefix(scheme.size());
  WsUrl out;
  const std::size_t slash = url.find('/');
  std::string_view authority = url.substr(0, slash);
  out.target = slash == std::string_view::npos ? "/ws" : std::string(url.substr(slash));
  const std::size_t colon = authority.rfind(':');
  if (colon == std::string_view::npos) {
    out.host = std::string(authority);
    out.port = std::to_string(kDefaultPort);
  } else {
    out.host = std::string(authority.substr(0, colon));
    out.port = std::string(authority.substr(colon + 1));
    if (out.port.empty() || out.port.find_first_not_of("0123456789") != std::string::npos) {
      return "bad port in url: '" + out.port + "'";
    }
  }
  if (out.host.empty()) return std::string("url has no host");
  return out;
}

struct WebSocketTransport::Impl {
  asio::io_context io;
  websocket::stream<beast::tcp_stream> ws{io};
  beast::flat_buffer buffer;
  std::deque<std::string> inbox;
  std::deque<std::string> outbox;
  bool writing = false;
  bool open = false;

  void read() {
    ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
      if (ec) {
        open = false;
        return;
      }
      inbox.push_back(beast::buffers_to_string(buffer.data()));
      buffer.consume(buffer.size());
      read();
    });
  }

  void write_next() {
    if (outbox.empty() || !open) {
      writing = false;
      return;
    }
    writing = true;
    ws.async_write(asio::buffer(outbox.front()), [this](beast::error_code ec, std::size_t) {
      outbox.pop_front();
      if (ec) {
        open = false;
        writing = false;
        return;
      }
      write_next();
    });
  }
};

WebSocketTransport::WebSocketTransport(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

WebSocketTransport::~WebSocketTransport() {
  if (impl_) close();
}

Result<std::unique_ptr<WebSocketTransport>, std::string> WebSocketTransport::connect(std::string_view url) {
  auto parsed = WsUrl::parse(url);
  if (!parsed) return parsed.error();
  const WsUrl& u = parsed.value();

  auto impl = std::make_unique<Impl>();
  beast::error_code ec;
  tcp::resolver resolver(impl->io);
  const auto endpoints = resolver.resolve(u.host, u.port, ec);
  if (ec) return "cannot resolve " + u.host + ": " + ec.message();
  beast::get_lowest_layer(impl->ws).connect(endpoints, ec);
  if (ec) return "cannot connect to " + u.host + ":" + u.port + ": " + ec.message();
  impl->ws.read_message_max(kMaxFrameBytes);
  impl->ws.handshake(u.host + ":" + u.port, u.target, ec);
  if (ec) return "websocket handshake failed: " + ec.message();
  impl->ws.text(true);
  impl->open = true;
  impl->read();
  return std::unique_ptr<WebSocketTransport>(new WebSocketTransport(std::move(impl)));
}

void WebSocketTransport::send(const std::string& frame) {
  if (!impl_->open) return;
  impl_->outbox.push_back(frame);
  if (!impl_->writing) impl_->write_next();
  while (impl_->writing && impl_->open) impl_->io.run_one();
}

std::optional<std::string> WebSocketTransport::receive(std::int64_t deadline_ms, peer::Clock& clock) {
  for (;;) {
    if (!impl_->inbox.empty()) {
      std::string frame = std::move(impl_->inbox.front());
      impl_->inbox.pop_front();
      return frame;
    }
    if (!impl_->open) return std::nullopt;
    const std::int64_t remaining = deadline_ms - clock.now_ms();
    if (remaining <= 0) return std::nullopt;
    impl_->io.run_one_for(std::chrono::milliseconds(remaining));
    if (impl_->io.stopped()) impl_->io.restart();
  }
}

void WebSocketTransport::close() {
  if (!impl_->open) return;
  impl_->open = false;
  beast::error_code ec;
  beast::get_lowest_layer(impl_->ws).expires_after(std::chrono::seconds(2));
  impl_->ws.async_close(websocket::close_code::normal, [](beast::error_code) {});
  impl_->io.run_for(std::chrono::seconds(2));
}

bool WebSocketTransport::is_open() const { return impl_->open; }

}  // namespace molsync::net
