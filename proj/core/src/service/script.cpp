#include "demoforge/service/script.hpp"

#include <algorithm>

#include "demoforge/kinematics/pose.hpp"
#include "demoforge/service/client.hpp"

namespace demoforge::service {

std::int64_t Script::end_tick() const { return rows.empty() ? 0 : rows.back().tick; }

namespace {

ScriptCommand parse_row_command(const config::Node& node) {
  if (node.labels.size() < 2) node.fail("expected 'at <tick> <command>'");
  const std::string cmd = node.label_text(1);
  const auto extra = [&](std::size_t allowed) {
    if (node.labels.size() > allowed) node.fail("unexpected argument after '" + cmd + "'");
  };
  if (cmd == "ee_delta") {
    extra(2);
    node.expect_only({"dx", "dy", "dz", "droll", "dpitch", "dyaw"});
    sim::EeDelta d;
    d.dx = node.optional_number("dx").value_or(0.0);
    d.dy = node.optional_number("dy").value_or(0.0);
    d.dz = node.optional_number("dz").value_or(0.0);
    d.droll = node.optional_number("droll").value_or(0.0);
    d.dpitch = node.optional_number("dpitch").value_or(0.0);
    d.dyaw = node.optional_number("dyaw").value_or(0.0);
    return d;
  }
  if (cmd == "pose_target") {
    extra(2);
    node.expect_only({"xyz", "rpy", "quat"});
    const auto xyz = node.numbers("xyz", 3);
    const kinematics::Vector3 p(xyz[0], xyz[1], xyz[2]);
    if (node.find("quat") != nullptr) {
      if (node.find("rpy") != nullptr) node.fail("give either rpy or quat, not both");
      const auto q = node.numbers("quat", 4);
      return sim::PoseTarget{kinematics::Pose{p, kinematics::Quaternion(q[0], q[1], q[2], q[3])}};
    }
    kinematics::Vector3 rpy = kinematics::Vector3::Zero();
    if (node.find("rpy") != nullptr) {
      const auto r = node.numbers("rpy", 3);
      rpy = {r[0], r[1], r[2]};
    }
    return sim::PoseTarget{kinematics::Pose::from_xyz_rpy(p, rpy)};
  }
  if (cmd == "gripper") {
    extra(3);
    if (node.labels.size() != 3) node.fail("expected 'gripper open' or 'gripper close'");
    const std::string arg = node.label_text(2);
    if (arg == "open") return sim::GripperAction{sim::Gripper::open};
    if (arg == "close" || arg == "closed") return sim::GripperAction{sim::Gripper::closed};
    node.fail("gripper takes open or close, found '" + arg + "'");
  }
  if (cmd == "reset") {
    extra(2);
    return sim::ResetAction{};
  }
  if (cmd == "end") {
    extra(2);
    return ScriptEnd{};
  }
  node.fail("unknown script command '" + cmd + "'");
}

}  // namespace

Script parse_script(const config::Document& doc) {
  const config::Node& root = doc.root;
  root.expect_only({"scene", "robot", "label", "record", "clock", "at"});
  Script s;
  s.scene = root.optional_text("scene");
  s.robot = root.optional_text("robot");
  s.label = root.optional_text("label").value_or("");
  s.record = root.optional_boolean("record").value_or(true);
  if (auto c = root.optional_text("clock")) {
    const auto mode = clock_mode_from(*c);
    if (!mode) root.require("clock").fail("clock must be realtime or lockstep");
    s.clock = *mode;
  }
  bool ended = false;
  for (const config::Node* row : root.all("at")) {
    if (row->is_assignment() || row->labels.empty() || row->labels[0].kind != config::Value::Kind::integer) {
      row->fail("expected 'at <tick> <command>'");
    }
    if (ended) row->fail("no rows may follow 'end'");
    ScriptRow r;
    r.tick = row->labels[0].integer;
    r.line = row->line;
    if (r.tick < 0) row->fail("tick must be non-negative");
    if (!s.rows.empty() && r.tick < s.rows.back().tick) row->fail("row ticks must not decrease");
    r.command = parse_row_command(*row);
    ended = std::holds_alternative<ScriptEnd>(r.command);
    s.rows.push_back(std::move(r));
  }
  return s;
}

Script load_script(const std::filesystem::path& path) { return parse_script(config::parse_file(path)); }

namespace {

class Runner {
 public:
  Runner(WsClient& ws, ScriptRunResult& result) : ws_(ws), result_(result) {}

  std::int64_t next_seq() { return ++client_seq_; }

  /// Reads until `done` holds for a message; Errors abort the run.
  template <class Pred>
  wire::Message read_until(Pred&& done) {
    for (;;) {
      wire::Message m = ws_.receive();
      if (auto* e = std::get_if<wire::ErrorMessage>(&m)) throw ScriptAborted(e->code, e->detail);
      if (auto* f = std::get_if<wire::StateFrame>(&m)) {
        if (last_seq_ && f->frame.seq <= *last_seq_) {
          throw ScriptAborted("protocol_violation", "frame seq did not increase");
        }
        last_seq_ = f->frame.seq;
        last_frame_tick_ = f->frame.tick;
        result_.frames.push_back(ws_.last_text());
      }
      if (done(m)) return m;
    }
  }

  void sync() {
    const std::int64_t nonce = ++nonce_;
    ws_.send(wire::Ping{nonce});
    read_until([&](const wire::Message& m) {
      const auto* p = std::get_if<wire::Pong>(&m);
      return p != nullptr && p->nonce == nonce;
    });
  }

  wire::RecordingEvent recording(bool started) {
    const wire::Message m = read_until([&](const wire::Message& msg) {
      const auto* r = std::get_if<wire::RecordingEvent>(&msg);
      return r != nullptr && r->started == started;
    });
    return std::get<wire::RecordingEvent>(m);
  }

  void send_row(const ScriptRow& row) {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, sim::ResetAction>) {
            ws_.send(wire::ControlCommand{next_seq(), wire::ControlOp::reset, "", 0});
          } else if constexpr (std::is_same_v<T, ScriptEnd>) {
          } else {
            ws_.send(wire::TeleopCommand{next_seq(), sim::TeleopPayload{c}});
          }
        },
        row.command);
    if (!std::holds_alternative<ScriptEnd>(row.command)) ++result_.commands_sent;
  }

  std::optional<std::int64_t> last_frame_tick_;

 private:
  WsClient& ws_;
  ScriptRunResult& result_;
  std::int64_t client_seq_ = 0;
  std::int64_t nonce_ = 0;
  std::optional<std::uint64_t> last_seq_;
};

}  // namespace

ScriptRunResult run_script(const Script& script, const ScriptRunOptions& opt) {
  ScriptRunResult result;
  HttpClient http(opt.host, opt.port);
  ClockMode clock = script.clock;
  if (opt.session_id.empty()) {
    if (!script.scene) throw ClientError("script names no scene and no session was given");
    wire::Json body{{"clock", to_string(script.clock)}, {"scene", *script.scene}};
    std::string robot;
    if (script.robot) {
      robot = *script.robot;
    } else {
      const HttpResult scenes = http.get("/api/v1/scenes");
      if (scenes.status == 200) {
        const wire::Json list = scenes.json();
        for (const auto& s : list["scenes"]) {
          if (s["name"] == *script.scene) robot = s["robot"].get<std::string>();
        }
      }
    }
    body["robot"] = robot;
    const HttpResult created = http.post("/api/v1/sessions", body, {{"X-Contributor", opt.contributor}});
    if (created.status != 201) throw ClientError("session create failed (" + std::to_string(created.status) + "): " + created.body);
    result.session_id = created.json()["session_id"].get<std::string>();
  } else {
    result.session_id = opt.session_id;
    const HttpResult d = http.get("/api/v1/sessions/" + opt.session_id);
    if (d.status != 200) throw ClientError("unknown session " + opt.session_id + ": " + d.body);
    clock = clock_mode_from(d.json()["clock"].get<std::string>()).value_or(ClockMode::realtime);
  }

  WsClient ws(opt.host, opt.port, result.session_id, opt.contributor);
  Runner run(ws, result);
  ws.send(wire::Hello{wire::kProtocolVersion, "script"});
  run.read_until([](const wire::Message& m) { return std::holds_alternative<wire::HelloAck>(m); });

  if (script.record) {
    ws.send(wire::ControlCommand{run.next_seq(), wire::ControlOp::record_start, script.label, 0});
    const auto ev = run.recording(true);
    result.episode_id = ev.episode_id;
    result.start_tick = ev.tick;
  }

  const std::int64_t end = script.end_tick();
  try {
    if (clock == ClockMode::lockstep) {
      if (!script.record) {
        const HttpResult d = http.get("/api/v1/sessions/" + result.session_id);
        result.start_tick = d.json()["tick"].get<std::int64_t>() + 1;
      }
      std::int64_t cursor = 0;
      for (const auto& row : script.rows) {
        if (row.tick > cursor) {
          ws.send(wire::ControlCommand{run.next_seq(), wire::ControlOp::advance, "", row.tick - cursor});
          cursor = row.tick;
          run.sync();
        }
        run.send_row(row);
      }
      if (end > cursor) ws.send(wire::ControlCommand{run.next_seq(), wire::ControlOp::advance, "", end - cursor});
      run.sync();
    } else {
      // Realtime: a row at k goes out once the frame before start_tick + k is seen.
      if (!script.record) {
        run.read_until([](const wire::Message& m) { return std::holds_alternative<wire::StateFrame>(m); });
        result.start_tick = *run.last_frame_tick_ + 1;
      }
      std::size_t next = 0;
      for (;;) {
        const std::int64_t seen = run.last_frame_tick_.value_or(result.start_tick - 1) - result.start_tick + 1;
        while (next < script.rows.size() && script.rows[next].tick <= seen) run.send_row(script.rows[next++]);
        if (next == script.rows.size() && seen >= end) break;
        run.read_until([](const wire::Message& m) { return std::holds_alternative<wire::StateFrame>(m); });
      }
      run.sync();
    }
  } catch (const ScriptAborted&) {
    // leave no dangling recording behind; the episode keeps what was taken
    if (script.record) {
      try {
        http.post("/api/v1/sessions/" + result.session_id + "/recording/stop", wire::Json::object());
      } catch (const ClientError&) {
      }
    }
    throw;
  }

  if (script.record) {
    ws.send(wire::ControlCommand{run.next_seq(), wire::ControlOp::record_stop, "", 0});
    result.end_tick = run.recording(false).tick;
  } else {
    result.end_tick = result.start_tick + end - 1;
  }
  ws.close();
  if (opt.close_session) http.post("/api/v1/sessions/" + result.session_id + "/close", wire::Json::object());
  return result;
}

}  // namespace demoforge::service
