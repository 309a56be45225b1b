#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "demoforge/service/demo_service.hpp"

namespace demoforge::service {

class BindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// HTTP API plus the /ws/v1/sessions/{id} streaming endpoint on one port.
class HttpServer {
 public:
  /// Binds immediately (port 0 picks a free port); throws BindError.
  HttpServer(DemoService& service, const std::string& host, std::uint16_t port, int threads = 4);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  std::uint16_t port() const;

  /// Starts accepting on background threads.
  void start();
  /// Stops accepting and joins the I/O threads. Idempotent.
  void stop();
  /// Blocks until SIGINT or SIGTERM, then runs `on_signal` and stops.
  void wait_for_signal(const std::function<void(int)>& on_signal);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace demoforge::service
