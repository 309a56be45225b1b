#pragma once

#include <set>
#include <variant>

#include "demoforge/wire/message.hpp"

namespace demoforge::wire {

struct SessionParams {
  std::string session_id;
  std::string scene_digest;
  double dt = sim::kTickDt.seconds();
  std::int64_t stream_rate_hz = 20;
};

/// HelloAck when the client's protocol version is supported, otherwise
/// Error{version_mismatch} (the caller then closes the connection).
std::variant<HelloAck, ErrorMessage> negotiate(const Hello& hello, const std::set<std::int64_t>& supported,
                                               const SessionParams& params);

/// Per-connection ordering rules on the client->server stream.
class ConnectionGuard {
 public:
  enum class Verdict { accept, reject_stale, reject_protocol };

  /// First message must be Hello and Hello may not repeat; command messages
  /// must carry a strictly increasing client_seq.
  Verdict admit(const Message& m);

  bool handshaken() const { return handshaken_; }
  std::int64_t last_client_seq() const { return last_seq_; }

 private:
  bool handshaken_ = false;
  std::int64_t last_seq_ = -1;
};

}  // namespace demoforge::wire
