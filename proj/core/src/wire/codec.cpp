#include "demoforge/wire/codec.hpp"

#include <array>

#include "demoforge/wire/json_io.hpp"

namespace demoforge::wire {

namespace {

constexpr std::array kKnownCodes{error_code::version_mismatch, error_code::protocol_violation,
                                 error_code::schema_violation, error_code::out_of_range,
                                 error_code::stale_command,    error_code::session_closed};

const char* op_name(ControlOp op) {
  switch (op) {
    case ControlOp::reset: return "reset";
    case ControlOp::record_start: return "record_start";
    case ControlOp::record_stop: return "record_stop";
    case ControlOp::advance: return "advance";
  }
  return "reset";
}

struct ToJson {
  Json operator()(const Hello& m) const {
    return Json{{"client_kind", m.client_kind}, {"protocol_version", m.protocol_version}, {"t", "hello"}};
  }
  Json operator()(const HelloAck& m) const {
    return Json{{"dt", m.dt},
                {"scene_digest", m.scene_digest},
                {"session_id", m.session_id},
                {"stream_rate_hz", m.stream_rate_hz},
                {"t", "hello_ack"}};
  }
  Json operator()(const TeleopCommand& m) const {
    Json out{{"client_seq", m.client_seq}};
    teleop_payload_fields(m.payload, out);
    return out;
  }
  Json operator()(const ControlCommand& m) const {
    Json out{{"client_seq", m.client_seq}, {"op", op_name(m.op)}, {"t", "control"}};
    if (m.op == ControlOp::record_start) out["label"] = m.label;
    if (m.op == ControlOp::advance) out["ticks"] = m.ticks;
    return out;
  }
  Json operator()(const StateFrame& m) const { return frame_to_json(m.frame); }
  Json operator()(const RecordingEvent& m) const {
    return Json{{"episode_id", m.episode_id},
                {"event", m.started ? "started" : "stopped"},
                {"t", "recording"},
                {"tick", m.tick}};
  }
  Json operator()(const ErrorMessage& m) const {
    return Json{{"code", m.code}, {"detail", m.detail}, {"t", "error"}};
  }
  Json operator()(const Ping& m) const { return Json{{"nonce", m.nonce}, {"t", "ping"}}; }
  Json operator()(const Pong& m) const { return Json{{"nonce", m.nonce}, {"t", "pong"}}; }
};

Message decode_control(FieldReader& r) {
  ControlCommand c;
  c.client_seq = r.integer("client_seq");
  const std::string op = r.string("op");
  if (op == "reset") {
    c.op = ControlOp::reset;
  } else if (op == "record_start") {
    c.op = ControlOp::record_start;
    c.label = r.string("label");
  } else if (op == "record_stop") {
    c.op = ControlOp::record_stop;
  } else if (op == "advance") {
    c.op = ControlOp::advance;
    c.ticks = r.integer("ticks", 1, kMaxAdvanceTicks);
  } else {
    r.fail("unknown control op '" + op + "'");
  }
  return c;
}

}  // namespace

bool is_known_error_code(const std::string& code) {
  for (const char* k : kKnownCodes) {
    if (code == k) return true;
  }
  return false;
}

const char* type_tag(const Message& m) {
  struct Tag {
    const char* operator()(const Hello&) const { return "hello"; }
    const char* operator()(const HelloAck&) const { return "hello_ack"; }
    const char* operator()(const TeleopCommand& c) const {
      if (std::holds_alternative<sim::EeDelta>(c.payload)) return "ee_delta";
      if (std::holds_alternative<sim::PoseTarget>(c.payload)) return "pose_target";
      return "gripper";
    }
    const char* operator()(const ControlCommand&) const { return "control"; }
    const char* operator()(const StateFrame&) const { return "state"; }
    const char* operator()(const RecordingEvent&) const { return "recording"; }
    const char* operator()(const ErrorMessage&) const { return "error"; }
    const char* operator()(const Ping&) const { return "ping"; }
    const char* operator()(const Pong&) const { return "pong"; }
  };
  return std::visit(Tag{}, m);
}

Json message_to_json(const Message& m) { return std::visit(ToJson{}, m); }

std::string encode_message(const Message& m) { return encode_canonical(message_to_json(m)); }

Message message_from_json(const Json& j) {
  if (!j.is_object()) throw WireError(WireError::Kind::schema_violation, "message must be an object");
  const auto tag_it = j.find("t");
  if (tag_it == j.end() || !tag_it->is_string()) {
    throw WireError(WireError::Kind::schema_violation, "message lacks a string type tag 't'");
  }
  const std::string tag = tag_it->get<std::string>();
  FieldReader r(j, tag);
  r.raw("t");

  Message out;
  if (tag == "hello") {
    out = Hello{r.integer("protocol_version"), r.string("client_kind")};
  } else if (tag == "hello_ack") {
    HelloAck a;
    a.dt = r.number("dt");
    a.scene_digest = r.string("scene_digest");
    a.session_id = r.string("session_id");
    a.stream_rate_hz = r.integer("stream_rate_hz");
    out = a;
  } else if (tag == "ee_delta" || tag == "pose_target" || tag == "gripper") {
    TeleopCommand c;
    c.client_seq = r.integer("client_seq");
    c.payload = teleop_payload_from_reader(tag, r);
    out = c;
  } else if (tag == "control") {
    out = decode_control(r);
  } else if (tag == "state") {
    // frame_from_json runs its own reader over the same object.
    out = StateFrame{frame_from_json(j)};
    return out;
  } else if (tag == "recording") {
    RecordingEvent e;
    e.episode_id = r.string("episode_id");
    const std::string ev = r.string("event");
    if (ev != "started" && ev != "stopped") r.fail("event must be 'started' or 'stopped'");
    e.started = ev == "started";
    e.tick = r.integer("tick");
    out = e;
  } else if (tag == "error") {
    ErrorMessage e{r.string("code"), r.string("detail")};
    if (!is_known_error_code(e.code)) r.fail("unknown error code '" + e.code + "'");
    out = e;
  } else if (tag == "ping") {
    out = Ping{r.integer("nonce")};
  } else if (tag == "pong") {
    out = Pong{r.integer("nonce")};
  } else {
    throw WireError(WireError::Kind::unknown_type, "unknown message type '" + tag + "'");
  }
  r.finish();
  return out;
}

Message decode_message(std::string_view text) {
  try {
    return message_from_json(parse_text(text));
  } catch (const WireError&) {
    throw;
  } catch (const std::exception& e) {
    // Anything else (allocation, library internals) is still a typed decode failure.
    throw WireError(WireError::Kind::malformed, std::string("decode failed: ") + e.what());
  }
}

bool is_client_message(const Message& m) {
  return std::holds_alternative<Hello>(m) || std::holds_alternative<TeleopCommand>(m) ||
         std::holds_alternative<ControlCommand>(m) || std::holds_alternative<Ping>(m);
}

}  // namespace demoforge::wire
