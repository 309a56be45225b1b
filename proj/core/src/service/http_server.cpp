#include "demoforge/service/http_server.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "demoforge/service/http_api.hpp"
#include "demoforge/service/outbound_queue.hpp"
#include "demoforge/wire/codec.hpp"
#include "demoforge/wire/handshake.hpp"

namespace demoforge::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// ------------------------------------------------------------- websocket

class WsConnection : public ClientSink, public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, std::shared_ptr<Session> session, std::string contributor)
      : ws_(std::move(socket)), session_(std::move(session)), contributor_(std::move(contributor)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(1 << 20);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->do_read();
    });
  }

  void deliver(std::shared_ptr<const std::string> text, bool state) override {
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text), state]() mutable {
      self->enqueue(std::move(text), state);
    });
  }

  void close() override {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->closing_ = true;
      self->maybe_close();
    });
  }

 private:
  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      detach();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    handle(text);
    if (!closing_) do_read();
  }

  void reply(const wire::Message& m) { enqueue(std::make_shared<const std::string>(wire::encode_message(m)), false); }

  void reject(const std::string& code, const std::string& detail) {
    reply(wire::ErrorMessage{code, detail});
    if (!guard_.handshaken()) {
      closing_ = true;
      maybe_close();
    }
  }

  void handle(const std::string& text) {
    wire::Message m;
    try {
      m = wire::decode_message(text);
    } catch (const wire::WireError& e) {
      reject(guard_.handshaken() ? e.code() : wire::error_code::protocol_violation, e.what());
      return;
    }
    if (!wire::is_client_message(m)) {
      reject(wire::error_code::protocol_violation, std::string("'") + wire::type_tag(m) + "' is not a client message");
      return;
    }
    switch (guard_.admit(m)) {
      case wire::ConnectionGuard::Verdict::reject_stale:
        reply(wire::ErrorMessage{wire::error_code::stale_command,
                                 "client_seq must exceed " + std::to_string(guard_.last_client_seq())});
        return;
      case wire::ConnectionGuard::Verdict::reject_protocol:
        reject(wire::error_code::protocol_violation,
               guard_.handshaken() ? "unexpected hello" : "first message must be hello");
        return;
      case wire::ConnectionGuard::Verdict::accept:
        break;
    }
    if (const auto* hello = std::get_if<wire::Hello>(&m)) {
      wire::SessionParams params;
      params.session_id = session_->id();
      params.scene_digest = session_->scene().scene_digest;
      params.stream_rate_hz = kStreamRateHz;
      auto result = wire::negotiate(*hello, {wire::kProtocolVersion}, params);
      if (auto* err = std::get_if<wire::ErrorMessage>(&result)) {
        reply(*err);
        closing_ = true;
        maybe_close();
        return;
      }
      if (session_->closed()) {
        reply(wire::ErrorMessage{wire::error_code::session_closed, "session is closed"});
        closing_ = true;
        maybe_close();
        return;
      }
      reply(std::get<wire::HelloAck>(result));
      connection_id_ = session_->attach(shared_from_this(), contributor_);
      return;
    }
    session_->submit(connection_id_, std::move(m));
  }

  void enqueue(std::shared_ptr<const std::string> text, bool state) {
    if (closed_) return;
    queue_.push(std::move(text), state, writing_);
    if (!writing_) do_write();
  }

  void do_write() {
    if (queue_.empty()) {
      maybe_close();
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(*queue_.front().text),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
  }

  void on_write(beast::error_code ec) {
    writing_ = false;
    queue_.pop();
    if (ec) {
      closed_ = true;
      detach();
      return;
    }
    do_write();
  }

  void maybe_close() {
    if (!closing_ || writing_ || !queue_.empty() || closed_) return;
    closed_ = true;
    detach();
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  void detach() {
    if (!connection_id_.empty()) {
      session_->detach(connection_id_);
      connection_id_.clear();
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::shared_ptr<Session> session_;
  std::string contributor_;
  std::string connection_id_;
  wire::ConnectionGuard guard_;
  OutboundQueue queue_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
};

// ------------------------------------------------------------- http

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, DemoService& service)
      : stream_(std::move(socket)), service_(service) {}

  void run() {
    net::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->do_read(); });
  }

 private:
  void do_read() {
    parser_.emplace();
    // room for headers plus an over-cap body that the media store rejects
    parser_->body_limit(static_cast<std::uint64_t>(service_.media_cap_bytes()) + (1u << 20));
    stream_.expires_after(std::chrono::seconds(120));
    http::async_read(stream_, buffer_, *parser_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec == http::error::end_of_stream) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (ec == http::error::body_limit) {
      ApiResponse r;
      r.status = 413;
      r.body = wire::encode_canonical(wire::Json{{"detail", "request body exceeds the media cap"}, {"error", "too_large"}});
      send(r, 11, false);
      return;
    }
    if (ec) return;

    http::request<http::string_body> req = parser_->release();
    ApiRequest api;
    api.method = std::string(req.method_string());
    split_target(std::string(req.target()), api.path, api.query);
    for (const auto& field : req) api.headers[lower(std::string(field.name_string()))] = std::string(field.value());

    if (websocket::is_upgrade(req)) {
      upgrade(std::move(req), api);
      return;
    }
    api.body = std::move(req.body());
    ApiResponse r = handle_api(service_, api);
    send(r, req.version(), req.keep_alive());
  }

  void upgrade(http::request<http::string_body> req, const ApiRequest& api) {
    const std::string prefix = "/ws/v1/sessions/";
    if (api.path.rfind(prefix, 0) != 0 || api.path.size() == prefix.size()) {
      ApiResponse r;
      r.status = 404;
      r.body = wire::encode_canonical(wire::Json{{"detail", "no socket endpoint " + api.path}, {"error", "not_found"}});
      send(r, req.version(), false);
      return;
    }
    std::shared_ptr<Session> session;
    try {
      session = service_.session(api.path.substr(prefix.size()));
    } catch (const ServiceError& e) {
      ApiResponse r;
      r.status = e.status();
      r.body = wire::encode_canonical(wire::Json{{"detail", e.what()}, {"error", e.code()}});
      send(r, req.version(), false);
      return;
    }
    std::string contributor = api.header("x-contributor");
    if (auto it = api.query.find("contributor"); it != api.query.end()) contributor = it->second;
    if (contributor.empty()) contributor = "anonymous";
    stream_.expires_never();
    std::make_shared<WsConnection>(stream_.release_socket(), std::move(session), std::move(contributor))
        ->run(std::move(req));
  }

  void send(const ApiResponse& r, unsigned version, bool keep_alive) {
    auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(r.status), version);
    res->set(http::field::server, "demoforge");
    res->set(http::field::content_type, r.content_type);
    if (!r.file.empty()) {
      std::ifstream in(r.file, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      res->body() = ss.str();
    } else {
      res->body() = r.body;
    }
    res->keep_alive(keep_alive);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res, keep_alive](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (keep_alive) {
        self->do_read();
      } else {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      }
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  DemoService& service_;
};

}  // namespace

struct HttpServer::Impl {
  DemoService& service;
  net::io_context ioc;
  tcp::acceptor acceptor;
  int threads;
  std::vector<std::thread> pool;
  bool stopped = false;

  Impl(DemoService& s, int n) : service(s), ioc(n), acceptor(net::make_strand(ioc)), threads(n) {}

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec == net::error::operation_aborted) return;
      } else {
        std::make_shared<HttpConnection>(std::move(socket), service)->run();
      }
      if (acceptor.is_open()) accept();
    });
  }
};

HttpServer::HttpServer(DemoService& service, const std::string& host, std::uint16_t port, int threads)
    : impl_(std::make_unique<Impl>(service, threads)) {
  beast::error_code ec;
  const auto address = net::ip::make_address(host, ec);
  if (ec) throw BindError("invalid bind host '" + host + "': " + ec.message());
  const tcp::endpoint endpoint(address, port);
  auto& a = impl_->acceptor;
  a.open(endpoint.protocol(), ec);
  if (!ec) a.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) a.bind(endpoint, ec);
  if (!ec) a.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw BindError("cannot listen on " + host + ":" + std::to_string(port) + ": " + ec.message());
}

HttpServer::~HttpServer() { stop(); }

std::uint16_t HttpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void HttpServer::start() {
  impl_->accept();
  for (int i = 0; i < impl_->threads; ++i) impl_->pool.emplace_back([this] { impl_->ioc.run(); });
}

void HttpServer::stop() {
  if (impl_->stopped) return;
  impl_->stopped = true;
  net::post(impl_->acceptor.get_executor(), [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  // let queued closes and session_closed errors reach clients
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  impl_->ioc.stop();
  for (auto& t : impl_->pool) t.join();
  impl_->pool.clear();
}

void HttpServer::wait_for_signal(const std::function<void(int)>& on_signal) {
  net::io_context sig_ioc;
  net::signal_set signals(sig_ioc, SIGINT, SIGTERM);
  int received = 0;
  signals.async_wait([&](beast::error_code ec, int signo) {
    if (!ec) received = signo;
  });
  sig_ioc.run();
  spdlog::info("signal {} received, shutting down", received);
  on_signal(received);
  stop();
}

}  // namespace demoforge::service
