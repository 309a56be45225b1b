#include "demoforge/wire/handshake.hpp"

#include "demoforge/wire/codec.hpp"

namespace demoforge::wire {

std::variant<HelloAck, ErrorMessage> negotiate(const Hello& hello, const std::set<std::int64_t>& supported,
                                               const SessionParams& params) {
  if (!supported.contains(hello.protocol_version)) {
    return ErrorMessage{error_code::version_mismatch,
                        "protocol version " + std::to_string(hello.protocol_version) + " is not supported"};
  }
  return HelloAck{params.session_id, params.scene_digest, params.dt, params.stream_rate_hz};
}

ConnectionGuard::Verdict ConnectionGuard::admit(const Message& m) {
  if (!handshaken_) {
    if (!std::holds_alternative<Hello>(m)) return Verdict::reject_protocol;
    handshaken_ = true;
    return Verdict::accept;
  }
  if (std::holds_alternative<Hello>(m) || !is_client_message(m)) return Verdict::reject_protocol;

  std::int64_t seq = -1;
  if (const auto* t = std::get_if<TeleopCommand>(&m)) seq = t->client_seq;
  if (const auto* c = std::get_if<ControlCommand>(&m)) seq = c->client_seq;
  if (seq < 0) return Verdict::accept;  // ping
  if (seq <= last_seq_) return Verdict::reject_stale;
  last_seq_ = seq;
  return Verdict::accept;
}

}  // namespace demoforge::wire
