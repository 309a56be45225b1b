#include "demoforge/store/records.hpp"

#include <chrono>
#include <ctime>
#include <random>

#include "demoforge/wire/json_io.hpp"

namespace demoforge::store {

using wire::FieldReader;

const char* to_string(StoreError::Kind kind) {
  switch (kind) {
    case StoreError::Kind::storage: return "storage";
    case StoreError::Kind::already_open: return "already_open";
    case StoreError::Kind::tick_discontinuity: return "tick_discontinuity";
    case StoreError::Kind::finalized: return "finalized";
    case StoreError::Kind::unknown_target: return "unknown_target";
    case StoreError::Kind::invalid_record: return "invalid_record";
    case StoreError::Kind::too_large: return "too_large";
    case StoreError::Kind::digest_mismatch: return "digest_mismatch";
    case StoreError::Kind::validation_failed: return "validation_failed";
  }
  return "unknown";
}

ActionKind ActionEvent::kind() const {
  if (std::holds_alternative<sim::ResetAction>(payload)) return ActionKind::reset;
  if (std::holds_alternative<sim::GripperAction>(payload)) return ActionKind::gripper;
  return ActionKind::teleop;
}

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::teleop: return "teleop";
    case ActionKind::reset: return "reset";
    case ActionKind::gripper: return "gripper";
  }
  return "teleop";
}

const char* to_string(AnnotationKind k) {
  switch (k) {
    case AnnotationKind::task_description: return "task_description";
    case AnnotationKind::procedure: return "procedure";
    case AnnotationKind::constraint: return "constraint";
    case AnnotationKind::rationale: return "rationale";
  }
  return "task_description";
}

std::optional<AnnotationKind> annotation_kind_from(const std::string& s) {
  if (s == "task_description") return AnnotationKind::task_description;
  if (s == "procedure") return AnnotationKind::procedure;
  if (s == "constraint") return AnnotationKind::constraint;
  if (s == "rationale") return AnnotationKind::rationale;
  return std::nullopt;
}

const char* to_string(MediaSource s) { return s == MediaSource::upload ? "upload" : "sim_capture"; }

Json to_json(const ActionEvent& a) {
  return Json{{"client_seq", a.client_seq},
              {"kind", to_string(a.kind())},
              {"origin", a.origin},
              {"payload", wire::action_to_json(a.payload)},
              {"tick", a.tick}};
}

ActionEvent action_event_from_json(const Json& j) {
  FieldReader r(j, "action");
  ActionEvent a;
  a.client_seq = r.integer("client_seq");
  const std::string kind = r.string("kind");
  a.origin = r.string("origin");
  a.payload = wire::action_from_json(r.raw("payload"));
  a.tick = r.integer("tick");
  r.finish();
  if (kind != to_string(a.kind())) r.fail("kind '" + kind + "' does not match payload");
  return a;
}

Json to_json(const AnnotationRecord& a) {
  return Json{{"anchor", a.anchor ? Json::array({a.anchor->first, a.anchor->second}) : Json(nullptr)},
              {"annotation_id", a.annotation_id},
              {"author", a.author},
              {"created_at", a.created_at},
              {"kind", to_string(a.kind)},
              {"target", a.target},
              {"text", a.text}};
}

AnnotationRecord annotation_from_json(const Json& j) {
  FieldReader r(j, "annotation");
  AnnotationRecord a;
  const Json& anchor = r.raw("anchor");
  if (!anchor.is_null()) {
    if (!anchor.is_array() || anchor.size() != 2 || !anchor[0].is_number_integer() || !anchor[1].is_number_integer()) {
      r.fail("anchor must be null or [t0, t1] integers");
    }
    a.anchor = std::make_pair(anchor[0].get<std::int64_t>(), anchor[1].get<std::int64_t>());
  }
  a.annotation_id = r.string("annotation_id");
  a.author = r.string("author");
  a.created_at = r.integer("created_at");
  const auto kind = annotation_kind_from(r.string("kind"));
  if (!kind) r.fail("unknown annotation kind");
  a.kind = *kind;
  a.target = r.string("target");
  a.text = r.string("text");
  r.finish();
  return a;
}

Json to_json(const MediaRecord& m) {
  Json meta{{"contributor", m.metadata.contributor},
            {"duration_s", m.metadata.duration_s ? Json(*m.metadata.duration_s) : Json(nullptr)},
            {"embodiment", m.metadata.embodiment},
            {"scene", m.metadata.scene},
            {"task_label", m.metadata.task_label}};
  return Json{{"byte_length", m.byte_length},   {"content_digest", m.content_digest},
              {"created_at", m.created_at},     {"declared_mime", m.declared_mime},
              {"media_id", m.media_id},         {"metadata", meta},
              {"source", to_string(m.source)},  {"target", m.target}};
}

MediaRecord media_from_json(const Json& j) {
  FieldReader r(j, "media");
  MediaRecord m;
  m.byte_length = r.integer("byte_length");
  m.content_digest = r.string("content_digest");
  m.created_at = r.integer("created_at");
  m.declared_mime = r.string("declared_mime");
  m.media_id = r.string("media_id");
  FieldReader meta(r.object("metadata"), "media.metadata");
  m.metadata.contributor = meta.string("contributor");
  const Json& dur = meta.raw("duration_s");
  if (!dur.is_null()) m.metadata.duration_s = wire::finite_number(dur, "media.metadata.duration_s");
  m.metadata.embodiment = meta.string("embodiment");
  m.metadata.scene = meta.string("scene");
  m.metadata.task_label = meta.string("task_label");
  meta.finish();
  const std::string source = r.string("source");
  if (source == "upload") {
    m.source = MediaSource::upload;
  } else if (source == "sim_capture") {
    m.source = MediaSource::sim_capture;
  } else {
    r.fail("unknown media source");
  }
  m.target = r.string("target");
  r.finish();
  return m;
}

namespace {

std::vector<std::string> string_list(const Json& j, FieldReader& r) {
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) r.fail("expected a list of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Json to_json(const EpisodeManifest& m) {
  return Json{{"action_count", m.action_count},
              {"annotations", m.annotations},
              {"contributors", m.contributors},
              {"created_at", m.created_at},
              {"dt", m.dt},
              {"end_tick", m.end_tick},
              {"episode_id", m.episode_id},
              {"finalized", m.finalized},
              {"frame_count", m.frame_count},
              {"label", m.label},
              {"media", m.media},
              {"multi_writer", m.multi_writer},
              {"robot", m.robot},
              {"robot_digest", m.robot_digest},
              {"scene", m.scene},
              {"scene_digest", m.scene_digest},
              {"session_id", m.session_id},
              {"start_tick", m.start_tick}};
}

EpisodeManifest manifest_from_json(const Json& j) {
  FieldReader r(j, "manifest");
  EpisodeManifest m;
  m.action_count = r.integer("action_count");
  m.annotations = string_list(r.array("annotations"), r);
  m.contributors = string_list(r.array("contributors"), r);
  m.created_at = r.integer("created_at");
  m.dt = r.number("dt");
  m.end_tick = r.integer("end_tick", -1);
  m.episode_id = r.string("episode_id");
  m.finalized = r.boolean("finalized");
  m.frame_count = r.integer("frame_count");
  m.label = r.string("label");
  m.media = string_list(r.array("media"), r);
  m.multi_writer = r.boolean("multi_writer");
  m.robot = r.string("robot");
  m.robot_digest = r.string("robot_digest");
  m.scene = r.string("scene");
  m.scene_digest = r.string("scene_digest");
  m.session_id = r.string("session_id");
  m.start_tick = r.integer("start_tick");
  r.finish();
  return m;
}

Json to_json(const ProvisionalManifest& m) {
  return Json{{"created_at", m.created_at},
              {"dt", m.dt},
              {"episode_id", m.episode_id},
              {"label", m.label},
              {"robot", m.robot},
              {"robot_digest", m.robot_digest},
              {"scene", m.scene},
              {"scene_digest", m.scene_digest},
              {"session_id", m.session_id},
              {"start_state", m.start_state},
              {"start_tick", m.start_tick}};
}

ProvisionalManifest provisional_from_json(const Json& j) {
  FieldReader r(j, "provisional");
  ProvisionalManifest m;
  m.created_at = r.integer("created_at");
  m.dt = r.number("dt");
  m.episode_id = r.string("episode_id");
  m.label = r.string("label");
  m.robot = r.string("robot");
  m.robot_digest = r.string("robot_digest");
  m.scene = r.string("scene");
  m.scene_digest = r.string("scene_digest");
  m.session_id = r.string("session_id");
  m.start_state = r.object("start_state");
  m.start_tick = r.integer("start_tick");
  r.finish();
  return m;
}

std::int64_t utc_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string new_record_id(const std::string& prefix) {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%S", &tm);

  thread_local std::mt19937_64 rng{std::random_device{}()};
  char tail[40];
  std::snprintf(tail, sizeof tail, "%03dZ-%08x", static_cast<int>(ms % 1000), static_cast<unsigned>(rng() & 0xffffffffu));
  return prefix + stamp + tail;
}

}  // namespace demoforge::store
