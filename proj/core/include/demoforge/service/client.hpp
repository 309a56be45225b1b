#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "demoforge/wire/canonical.hpp"
#include "demoforge/wire/message.hpp"

namespace demoforge::service {

class ClientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HttpResult {
  int status = 0;
  std::string body;
  wire::Json json() const { return wire::parse_text(body); }
};

/// Blocking HTTP/1.1 client, one connection per request.
class HttpClient {
 public:
  HttpClient(std::string host, std::uint16_t port, std::chrono::milliseconds timeout = std::chrono::seconds(30));

  HttpResult request(const std::string& method, const std::string& target, const std::string& body = "",
                     const std::map<std::string, std::string>& headers = {},
                     const std::string& content_type = "application/json");
  HttpResult get(const std::string& target) { return request("GET", target); }
  HttpResult post(const std::string& target, const wire::Json& body,
                  const std::map<std::string, std::string>& headers = {}) {
    return request("POST", target, wire::encode_canonical(body), headers);
  }

 private:
  std::string host_;
  std::uint16_t port_;
  std::chrono::milliseconds timeout_;
};

/// Blocking wire-protocol client for one session stream.
class WsClient {
 public:
  WsClient(const std::string& host, std::uint16_t port, const std::string& session_id,
           const std::string& contributor = "script", std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~WsClient();
  WsClient(const WsClient&) = delete;
  WsClient& operator=(const WsClient&) = delete;

  void send(const wire::Message& m);
  void send_text(const std::string& text);
  /// Next message; throws ClientError on close, timeout or an undecodable frame.
  wire::Message receive();
  /// Raw text of the last received frame.
  const std::string& last_text() const { return last_text_; }
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string last_text_;
};

}  // namespace demoforge::service
