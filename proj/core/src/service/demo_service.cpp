#include "demoforge/service/demo_service.hpp"

#include <spdlog/spdlog.h>

#include "demoforge/store/records.hpp"

namespace demoforge::service {

namespace fs = std::filesystem;

namespace {

ServiceError recording_error(const RecordingResult& r) {
  if (r.error == "already_recording" || r.error == "not_recording") return ServiceError(r.error, 409, r.detail);
  if (r.error == "session_closed") return ServiceError(r.error, 410, r.detail);
  return ServiceError(r.error.empty() ? "storage" : r.error, 500, r.detail);
}

}  // namespace

DemoService::DemoService(store::Catalog catalog, const fs::path& data_dir, std::int64_t max_sessions,
                         std::int64_t media_cap_bytes)
    : catalog_(std::move(catalog)), store_(data_dir), media_(store_, media_cap_bytes), max_sessions_(max_sessions) {}

DemoService::~DemoService() { shutdown(); }

SessionDescriptor DemoService::create_session(const std::string& scene, const std::string& robot, ClockMode clock) {
  const store::CatalogScene* cs = catalog_.scene(scene);
  if (cs == nullptr) throw ServiceError("unknown_scene", 404, "unknown scene '" + scene + "'");
  if (catalog_.robot(robot) == nullptr) throw ServiceError("unknown_robot", 404, "unknown robot '" + robot + "'");
  if (cs->scene->robot.name != robot) {
    throw ServiceError("robot_mismatch", 400,
                       "scene '" + scene + "' is authored for robot '" + cs->scene->robot.name + "', not '" + robot + "'");
  }
  std::lock_guard lock(mu_);
  std::int64_t live = 0;
  for (const auto& [id, s] : sessions_) live += s->closed() ? 0 : 1;
  if (live >= max_sessions_) {
    throw ServiceError("capacity", 503, "server is at its session capacity of " + std::to_string(max_sessions_));
  }
  const std::string id = "s" + std::to_string(++session_counter_) + "-" + store::new_record_id();
  auto session = std::make_shared<Session>(id, *cs, store_, clock);
  sessions_[id] = session;
  spdlog::info("created session {} on scene {} ({})", id, scene, to_string(clock));
  return session->descriptor();
}

std::vector<SessionDescriptor> DemoService::list_sessions() const {
  std::vector<SessionDescriptor> out;
  std::lock_guard lock(mu_);
  for (const auto& [id, s] : sessions_) out.push_back(s->descriptor());
  return out;
}

std::shared_ptr<Session> DemoService::session(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError("unknown_session", 404, "unknown session '" + id + "'");
  if (it->second->closed()) throw ServiceError("session_closed", 410, "session '" + id + "' is closed");
  return it->second;
}

SessionDescriptor DemoService::describe_session(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError("unknown_session", 404, "unknown session '" + id + "'");
  return it->second->descriptor();
}

SessionDescriptor DemoService::close_session(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError("unknown_session", 404, "unknown session '" + id + "'");
    s = it->second;
  }
  s->close();
  return s->descriptor();
}

RecordingResult DemoService::start_recording(const std::string& session_id, const std::string& label,
                                             const std::string& contributor) {
  RecordingResult r = session(session_id)->start_recording(label, contributor).get();
  if (!r.ok) throw recording_error(r);
  return r;
}

RecordingResult DemoService::stop_recording(const std::string& session_id) {
  RecordingResult r = session(session_id)->stop_recording().get();
  if (!r.ok) throw recording_error(r);
  return r;
}

std::int64_t DemoService::advance(const std::string& session_id, std::int64_t ticks) {
  auto s = session(session_id);
  if (s->clock() != ClockMode::lockstep) {
    throw ServiceError("not_lockstep", 409, "session '" + session_id + "' runs on the realtime clock");
  }
  if (ticks < 1 || ticks > wire::kMaxAdvanceTicks) {
    throw ServiceError("bad_request", 400, "ticks must be in [1, " + std::to_string(wire::kMaxAdvanceTicks) + "]");
  }
  return s->advance(ticks).get();
}

DemoService::Target DemoService::resolve_target(const std::string& target) const {
  Target t;
  if (store_.has_episode(target)) {
    const store::EpisodeManifest m = store_.manifest(target);
    t.dir = store_.episode_dir(target);
    t.scene = m.scene;
    t.robot = m.robot;
    t.label = m.label;
    t.first_tick = m.start_tick;
    if (m.finalized) t.last_tick = m.end_tick;
    return t;
  }
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(target);
  if (it == sessions_.end()) throw ServiceError("unknown_target", 404, "no episode or session '" + target + "'");
  const SessionDescriptor d = it->second->descriptor();
  t.dir = store_.session_dir(target);
  t.scene = d.scene;
  t.robot = d.robot;
  t.first_tick = 0;
  t.last_tick = d.tick;
  return t;
}

store::AnnotationRecord DemoService::submit_annotation(const AnnotationRequest& req) {
  const auto kind = store::annotation_kind_from(req.kind);
  if (!kind) throw ServiceError("invalid_annotation", 400, "unknown annotation kind '" + req.kind + "'");
  if (req.text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ServiceError("invalid_annotation", 400, "annotation text is empty");
  }
  const Target t = resolve_target(req.target);
  if (req.anchor) {
    const auto [t0, t1] = *req.anchor;
    if (t0 > t1) throw ServiceError("invalid_annotation", 400, "anchor t0 > t1");
    if (t0 < t.first_tick || (t.last_tick && t1 > *t.last_tick)) {
      throw ServiceError("invalid_annotation", 400, "anchor outside the target's tick range");
    }
  }
  store::AnnotationRecord rec;
  rec.annotation_id = store::new_record_id("an-");
  rec.target = req.target;
  rec.author = req.author;
  rec.text = req.text;
  rec.kind = *kind;
  rec.created_at = store::utc_now_ms();
  rec.anchor = req.anchor;
  store_.append_annotation(t.dir, rec);
  return rec;
}

UploadResult DemoService::upload_media(const MediaRequest& req, std::string_view bytes) {
  const Target t = resolve_target(req.target);
  store::MediaUpload up;
  up.target = req.target;
  up.target_dir = t.dir;
  up.source = req.source;
  up.declared_mime = req.declared_mime;
  up.declared_digest = req.declared_digest;
  up.metadata.scene = t.scene;
  up.metadata.embodiment = t.robot;
  up.metadata.task_label = req.task_label.value_or(t.label);
  up.metadata.contributor = req.contributor;
  up.metadata.duration_s = req.duration_s;
  try {
    UploadResult r;
    r.record = media_.put(up, bytes, &r.created);
    return r;
  } catch (const store::StoreError& e) {
    switch (e.kind()) {
      case store::StoreError::Kind::too_large: throw ServiceError("too_large", 413, e.what());
      case store::StoreError::Kind::digest_mismatch: throw ServiceError("digest_mismatch", 422, e.what());
      case store::StoreError::Kind::invalid_record: throw ServiceError("bad_request", 400, e.what());
      default: throw ServiceError("storage", 500, e.what());
    }
  }
}

std::vector<store::EpisodeManifest> DemoService::list_episodes() const {
  std::vector<store::EpisodeManifest> out;
  for (const auto& id : store_.episode_ids()) {
    try {
      out.push_back(store_.manifest(id));
    } catch (const std::exception& e) {
      spdlog::warn("episode {} unreadable: {}", id, e.what());
    }
  }
  return out;
}

store::EpisodeManifest DemoService::get_episode(const std::string& episode_id) const {
  if (!store_.has_episode(episode_id)) throw ServiceError("unknown_episode", 404, "unknown episode '" + episode_id + "'");
  return store_.manifest(episode_id);
}

fs::path DemoService::episode_frames_path(const std::string& episode_id) const {
  if (!store_.has_episode(episode_id)) throw ServiceError("unknown_episode", 404, "unknown episode '" + episode_id + "'");
  return store_.episode_dir(episode_id) / store::layout::kFrames;
}

std::vector<std::string> DemoService::recover() {
  const auto ids = store_.unfinalized_episodes();
  for (const auto& id : ids) {
    try {
      const auto m = store_.manifest(id);
      spdlog::warn("episode {} was not finalized; keeping {} frames as a truncated episode", id, m.frame_count);
    } catch (const std::exception& e) {
      spdlog::error("episode {} is unreadable: {}", id, e.what());
    }
  }
  return ids;
}

void DemoService::shutdown() {
  std::map<std::string, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mu_);
    sessions = sessions_;
  }
  for (auto& [id, s] : sessions) s->close();
}

}  // namespace demoforge::service
