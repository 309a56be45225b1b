#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "demoforge/config/document.hpp"
#include "demoforge/service/session.hpp"
#include "demoforge/sim/command.hpp"
#include "demoforge/wire/message.hpp"

namespace demoforge::service {

struct ScriptEnd {
  bool operator==(const ScriptEnd&) const = default;
};

using ScriptCommand = std::variant<sim::EeDelta, sim::PoseTarget, sim::GripperAction, sim::ResetAction, ScriptEnd>;

/// "at <tick> <command>": the command is applied before the step that
/// produces the frame `tick` ticks after the first recorded one.
struct ScriptRow {
  std::int64_t tick = 0;
  ScriptCommand command;
  int line = 0;
};

struct Script {
  std::optional<std::string> scene;
  std::optional<std::string> robot;
  std::string label;
  bool record = true;
  ClockMode clock = ClockMode::lockstep;
  std::vector<ScriptRow> rows;  // non-decreasing ticks; `end` is last if present

  /// Tick of the `end` row, else the last row's tick, else 0.
  std::int64_t end_tick() const;
};

/// Rows are not bounds-checked here: out-of-range deltas are sent as written
/// so the server's rejection path can be exercised.
Script parse_script(const config::Document& doc);
Script load_script(const std::filesystem::path& path);

struct ScriptRunOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;
  /// Existing session to drive; empty creates one from the script's scene.
  std::string session_id;
  std::string contributor = "script";
  bool close_session = false;
};

struct ScriptRunResult {
  std::string session_id;
  std::optional<std::string> episode_id;
  std::int64_t start_tick = 0;
  std::int64_t end_tick = 0;
  std::int64_t commands_sent = 0;
  /// Encoded StateFrames in arrival order.
  std::vector<std::string> frames;
};

/// Server reported an Error while the script ran.
class ScriptAborted : public std::runtime_error {
 public:
  ScriptAborted(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Connects, optionally records, sends each row at its tick and stops.
/// Lockstep sessions are driven with advance, so the run is reproducible;
/// realtime sessions are paced by the received frames.
ScriptRunResult run_script(const Script& script, const ScriptRunOptions& options);

}  // namespace demoforge::service
