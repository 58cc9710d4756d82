#include "molsync/net/relay_server.hpp"

#include <map>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace molsync::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

std::int64_t epoch_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

class WsSession;

namespace detail {

struct ServerState : std::enable_shared_from_this<ServerState> {
  ServerState(asio::io_context& io, RelayServerOptions opts)
      : io(io), options(std::move(opts)), acceptor(io), relay(options.relay) {}

  void accept();
  void dispatch(const std::vector<relay::Outbound>& out);

  asio::io_context& io;
  RelayServerOptions options;
  tcp::acceptor acceptor;
  relay::Relay relay;
  std::map<std::uint64_t, std::weak_ptr<WsSession>> sessions;
  std::uint64_t next_connection = 1;
  std::uint64_t queue_drops = 0;
  bool stopped = false;
};

}  // namespace detail

using detail::ServerState;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, std::shared_ptr<ServerState> server, relay::ConnectionId id)
      : ws_(std::move(socket)),
        server_(std::move(server)),
        id_(id),
        queue_(server_->options.queue_capacity) {}

  void run(http::request<http::string_body> request) {
    websocket::stream_base::timeout timeout{};
    timeout.handshake_timeout = std::chrono::seconds(30);
    timeout.idle_timeout = server_->options.idle_timeout;
    timeout.keep_alive_pings = true;
    ws_.set_option(timeout);
    ws_.read_message_max(server_->options.max_frame_bytes);
    ws_.text(true);
    ws_.async_accept(request, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->server_->sessions[self->id_.value] = self;
      self->read();
    });
  }

  void enqueue(const relay::Outbound& out) {
    if (closing_) return;
    if (!queue_.push(relay::QueuedFrame{out.frame, out.kind})) ++server_->queue_drops;
    if (!writing_) write_next();
  }

  void close_now() {
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      closed();
      return;
    }
    if (!ws_.got_text()) {
      // The protocol is text-only.
      closed();
      close_after_drain_ = true;
      if (!writing_) finish();
      return;
    }
    const std::string frame = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    relay::Reaction reaction = server_->relay.on_frame(id_, frame, epoch_ms());
    server_->dispatch(reaction.out);
    if (reaction.close) {
      closed();
      close_after_drain_ = true;
      if (!writing_) finish();
      return;
    }
    read();
  }

  // Unregisters from the relay; partners get peer_left.
  void closed() {
    if (closing_) return;
    closing_ = true;
    server_->sessions.erase(id_.value);
    server_->dispatch(server_->relay.on_close(id_));
  }

  void write_next() {
    auto next = queue_.pop();
    if (!next) {
      writing_ = false;
      if (close_after_drain_) finish();
      return;
    }
    writing_ = true;
    in_flight_ = std::move(next->text);
    ws_.async_write(asio::buffer(in_flight_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->writing_ = false;
        self->closed();
        return;
      }
      self->write_next();
    });
  }

  void finish() {
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<ServerState> server_;
  relay::ConnectionId id_;
  relay::OutboundQueue queue_;
  beast::flat_buffer buffer_;
  std::string in_flight_;
  bool writing_ = false;
  bool closing_ = false;
  bool close_after_drain_ = false;
};

namespace {

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, std::shared_ptr<ServerState> server)
      : stream_(std::move(socket)), server_(std::move(server)) {}

  void read() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

 private:
  void on_read(beast::error_code ec) {
    if (ec) return;
    if (websocket::is_upgrade(request_) && request_.target() == "/ws") {
      if (server_->stopped) return;
      stream_.expires_never();
      const relay::ConnectionId id{server_->next_connection++};
      std::make_shared<WsSession>(stream_.release_socket(), server_, id)->run(std::move(request_));
      return;
    }
    auto response = std::make_shared<http::response<http::string_body>>();
    response->version(request_.version());
    response->keep_alive(request_.keep_alive());
    response->set(http::field::content_type, "text/plain");
    if (request_.method() == http::verb::get && request_.target() == "/healthz") {
      response->result(http::status::ok);
      response->body() = "ok\n";
    } else {
      response->result(http::status::not_found);
      response->body() = "not found\n";
    }
    response->prepare_payload();
    http::async_write(stream_, *response,
                      [self = shared_from_this(), response](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (response->keep_alive()) {
                          self->read();
                        } else {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                        }
                      });
  }

  beast::tcp_stream stream_;
  std::shared_ptr<ServerState> server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
};

}  // namespace

void ServerState::accept() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (self->stopped) return;
    if (!ec) std::make_shared<HttpSession>(std::move(socket), self)->read();
    self->accept();
  });
}

void ServerState::dispatch(const std::vector<relay::Outbound>& out) {
  for (const relay::Outbound& o : out) {
    auto it = sessions.find(o.connection.value);
    if (it == sessions.end()) continue;
    if (auto session = it->second.lock()) session->enqueue(o);
  }
}

RelayServer::RelayServer(asio::io_context& io, RelayServerOptions options)
    : impl_(std::make_shared<ServerState>(io, std::move(options))) {}

RelayServer::~RelayServer() { stop(); }

Result<std::uint16_t, std::string> RelayServer::start() {
  beast::error_code ec;
  const auto address = asio::ip::make_address(impl_->options.bind, ec);
  if (ec) return "bad bind address '" + impl_->options.bind + "': " + ec.message();
  const tcp::endpoint endpoint(address, impl_->options.port);
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) return "cannot listen on " + impl_->options.bind + ":" + std::to_string(impl_->options.port) + ": " + ec.message();
  impl_->stopped = false;
  impl_->accept();
  return port();
}

void RelayServer::stop() {
  if (impl_->stopped) return;
  impl_->stopped = true;
  beast::error_code ignored;
  impl_->acceptor.close(ignored);
  auto sessions = impl_->sessions;
  for (auto& [id, weak] : sessions) {
    if (auto s = weak.lock()) s->close_now();
  }
}

std::uint16_t RelayServer::port() const noexcept {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? 0 : ep.port();
}

std::size_t RelayServer::connection_count() const noexcept { return impl_->sessions.size(); }
const relay::Relay& RelayServer::relay() const noexcept { return impl_->relay; }
std::uint64_t RelayServer::queue_drops() const noexcept { return impl_->queue_drops; }

}  // namespace molsync::net
