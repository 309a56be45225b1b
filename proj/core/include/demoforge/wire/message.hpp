#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "demoforge/sim/command.hpp"
#include "demoforge/sim/world.hpp"

namespace demoforge::wire {

inline constexpr std::int64_t kProtocolVersion = 1;

namespace error_code {
inline constexpr const char* version_mismatch = "version_mismatch";
inline constexpr const char* protocol_violation = "protocol_violation";
inline constexpr const char* schema_violation = "schema_violation";
inline constexpr const char* out_of_range = "out_of_range";
inline constexpr const char* stale_command = "stale_command";
inline constexpr const char* session_closed = "session_closed";
}  // namespace error_code

bool is_known_error_code(const std::string& code);

struct Hello {
  std::int64_t protocol_version = kProtocolVersion;
  std::string client_kind;
  bool operator==(const Hello&) const = default;
};

struct HelloAck {
  std::string session_id;
  std::string scene_digest;
  double dt = 0.0;
  std::int64_t stream_rate_hz = 0;
  bool operator==(const HelloAck&) const = default;
};

struct TeleopCommand {
  std::int64_t client_seq = 0;
  sim::TeleopPayload payload;
  bool operator==(const TeleopCommand&) const = default;
};

enum class ControlOp { reset, record_start, record_stop, advance };

/// Session control from a streaming client. `advance` is only honoured by
/// lockstep sessions and steps the world `ticks` times.
struct ControlCommand {
  std::int64_t client_seq = 0;
  ControlOp op = ControlOp::reset;
  std::string label;        // record_start
  std::int64_t ticks = 0;   // advance
  bool operator==(const ControlCommand&) const = default;
};

struct StateFrame {
  sim::SimFrame frame;
  bool operator==(const StateFrame&) const = default;
};

struct RecordingEvent {
  std::string episode_id;
  bool started = true;
  std::int64_t tick = 0;
  bool operator==(const RecordingEvent&) const = default;
};

struct ErrorMessage {
  std::string code;
  std::string detail;
  bool operator==(const ErrorMessage&) const = default;
};

struct Ping {
  std::int64_t nonce = 0;
  bool operator==(const Ping&) const = default;
};

struct Pong {
  std::int64_t nonce = 0;
  bool operator==(const Pong&) const = default;
};

using Message =
    std::variant<Hello, HelloAck, TeleopCommand, ControlCommand, StateFrame, RecordingEvent, ErrorMessage, Ping, Pong>;

/// Type tag ("t") of a message.
const char* type_tag(const Message& m);

inline constexpr std::int64_t kMaxAdvanceTicks = 36000;

}  // namespace demoforge::wire
