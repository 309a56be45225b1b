#include "demoforge/service/client.hpp"

#include <sys/socket.h>
#include <sys/time.h>

#include <limits>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "demoforge/wire/codec.hpp"

namespace demoforge::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

void set_timeouts(tcp::socket& s, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(s.native_handle(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(s.native_handle(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void connect(net::io_context& ioc, tcp::socket& socket, const std::string& host, std::uint16_t port) {
  tcp::resolver resolver(ioc);
  beast::error_code ec;
  const auto results = resolver.resolve(host, std::to_string(port), ec);
  if (!ec) net::connect(socket, results, ec);
  if (ec) throw ClientError("cannot connect to " + host + ":" + std::to_string(port) + ": " + ec.message());
}

}  // namespace

HttpClient::HttpClient(std::string host, std::uint16_t port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

HttpResult HttpClient::request(const std::string& method, const std::string& target, const std::string& body,
                               const std::map<std::string, std::string>& headers, const std::string& content_type) {
  net::io_context ioc;
  tcp::socket socket(ioc);
  connect(ioc, socket, host_, port_);
  set_timeouts(socket, timeout_);

  http::request<http::string_body> req(http::string_to_verb(method), target, 11);
  req.set(http::field::host, host_);
  req.set(http::field::content_type, content_type);
  for (const auto& [k, v] : headers) req.set(k, v);
  req.body() = body;
  req.keep_alive(false);
  req.prepare_payload();

  beast::error_code ec;
  http::write(socket, req, ec);
  if (ec && ec != net::error::broken_pipe && ec != net::error::connection_reset) {
    throw ClientError(method + " " + target + ": " + ec.message());
  }
  beast::flat_buffer buffer;
  http::response_parser<http::string_body> parser;
  parser.body_limit(std::numeric_limits<std::uint64_t>::max());
  http::read(socket, buffer, parser, ec);
  if (ec) throw ClientError(method + " " + target + ": " + ec.message());
  socket.shutdown(tcp::socket::shutdown_both, ec);
  HttpResult r;
  r.status = static_cast<int>(parser.get().result_int());
  r.body = parser.get().body();
  return r;
}

struct WsClient::Impl {
  net::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};
  beast::flat_buffer buffer;
};

WsClient::WsClient(const std::string& host, std::uint16_t port, const std::string& session_id,
                   const std::string& contributor, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
  connect(impl_->ioc, impl_->ws.next_layer(), host, port);
  set_timeouts(impl_->ws.next_layer(), timeout);
  beast::error_code ec;
  impl_->ws.handshake(host + ":" + std::to_string(port), "/ws/v1/sessions/" + session_id + "?contributor=" + contributor,
                      ec);
  if (ec) throw ClientError("websocket handshake for session " + session_id + " failed: " + ec.message());
  impl_->ws.text(true);
}

WsClient::~WsClient() {
  try {
    close();
  } catch (...) {
  }
}

void WsClient::send(const wire::Message& m) { send_text(wire::encode_message(m)); }

void WsClient::send_text(const std::string& text) {
  beast::error_code ec;
  impl_->ws.write(net::buffer(text), ec);
  if (ec) throw ClientError("send failed: " + ec.message());
}

wire::Message WsClient::receive() {
  beast::error_code ec;
  impl_->buffer.consume(impl_->buffer.size());
  impl_->ws.read(impl_->buffer, ec);
  if (ec) throw ClientError("receive failed: " + ec.message());
  last_text_ = beast::buffers_to_string(impl_->buffer.data());
  try {
    return wire::decode_message(last_text_);
  } catch (const wire::WireError& e) {
    throw ClientError(std::string("undecodable server message: ") + e.what());
  }
}

void WsClient::close() {
  if (!impl_->ws.is_open()) return;
  beast::error_code ec;
  impl_->ws.close(websocket::close_code::normal, ec);
  // drain until the server's close frame
  while (!ec) {
    impl_->buffer.consume(impl_->buffer.size());
    impl_->ws.read(impl_->buffer, ec);
  }
}

}  // namespace demoforge::service
