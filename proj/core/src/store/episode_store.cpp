#include "demoforge/store/episode_store.hpp"

#include <algorithm>

#include "demoforge/wire/json_io.hpp"
#include "file_io.hpp"

namespace demoforge::store {

namespace fs = std::filesystem;

namespace {

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '-' || c == '_';
  });
}

template <class T, class Fn>
std::vector<T> read_records(const fs::path& path, Fn&& decode) {
  std::vector<T> out;
  for (const auto& line : io::read_lines(path)) {
    if (!line.terminated) break;
    try {
      out.push_back(decode(wire::parse_text(line.text)));
    } catch (const wire::WireError&) {
      // skipped here; validate_episode reports it
    }
  }
  return out;
}

void merge_ids(std::vector<std::string>& ids, const std::vector<std::string>& more) {
  for (const auto& id : more) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
}

}  // namespace

// ---------------------------------------------------------------- writer

EpisodeWriter::EpisodeWriter(EpisodeStore& store, std::string session_id, std::string episode_id, fs::path dir,
                             ProvisionalManifest provisional)
    : store_(store),
      session_id_(std::move(session_id)),
      episode_id_(std::move(episode_id)),
      dir_(std::move(dir)),
      provisional_(std::move(provisional)) {
  start_tick_ = provisional_.start_tick;
  last_tick_ = start_tick_ - 1;
  last_action_tick_ = start_tick_;
  frames_log_ = std::make_unique<io::AppendFile>(dir_ / layout::kFrames);
  actions_log_ = std::make_unique<io::AppendFile>(dir_ / layout::kActions);
}

EpisodeWriter::~EpisodeWriter() {
  if (finalized_) return;
  try {
    flush();
  } catch (...) {
  }
  store_.release(session_id_);
}

void EpisodeWriter::require_open() const {
  if (finalized_) throw StoreError(StoreError::Kind::finalized, "episode " + episode_id_ + " is finalized");
}

void EpisodeWriter::append_frame(const sim::SimFrame& frame) {
  require_open();
  if (frame.tick != last_tick_ + 1) {
    throw StoreError(StoreError::Kind::tick_discontinuity,
                     "frame tick " + std::to_string(frame.tick) + " after " + std::to_string(last_tick_));
  }
  if (frames_ > 0 && frame.seq <= last_seq_) {
    throw StoreError(StoreError::Kind::invalid_record, "frame seq not increasing");
  }
  frame_buffer_ += wire::encode_canonical(wire::frame_to_json(frame));
  frame_buffer_ += '\n';
  last_tick_ = frame.tick;
  last_seq_ = frame.seq;
  ++frames_;
  if (++unflushed_frames_ >= kFlushFrames) flush();
}

void EpisodeWriter::append_action(const ActionEvent& action) {
  require_open();
  if (action.tick < start_tick_ || action.tick > last_tick_) {
    throw StoreError(StoreError::Kind::tick_discontinuity, "action tick " + std::to_string(action.tick) +
                                                               " outside [" + std::to_string(start_tick_) + ", " +
                                                               std::to_string(last_tick_) + "]");
  }
  if (action.tick < last_action_tick_) {
    throw StoreError(StoreError::Kind::tick_discontinuity, "action ticks must not decrease");
  }
  action_buffer_ += wire::encode_canonical(to_json(action));
  action_buffer_ += '\n';
  last_action_tick_ = action.tick;
  ++actions_;
  if (!action.origin.empty()) origins_.insert(action.origin);
}

void EpisodeWriter::append_annotation(const AnnotationRecord& record) {
  require_open();
  store_.append_annotation(dir_, record);
}

void EpisodeWriter::add_contributor(const std::string& contributor) {
  if (!contributor.empty()) contributors_.insert(contributor);
}

void EpisodeWriter::flush() {
  // frames before actions so an interrupted flush never leaves an action
  // without its frame on disk
  if (!frame_buffer_.empty()) {
    frames_log_->write(frame_buffer_);
    frame_buffer_.clear();
  }
  if (!action_buffer_.empty()) {
    actions_log_->write(action_buffer_);
    action_buffer_.clear();
  }
  unflushed_frames_ = 0;
}

EpisodeManifest EpisodeWriter::finalize() {
  require_open();
  flush();
  frames_log_->sync();
  actions_log_->sync();

  EpisodeManifest m;
  m.episode_id = episode_id_;
  m.session_id = session_id_;
  m.scene = provisional_.scene;
  m.scene_digest = provisional_.scene_digest;
  m.robot = provisional_.robot;
  m.robot_digest = provisional_.robot_digest;
  m.label = provisional_.label;
  m.start_tick = start_tick_;
  m.end_tick = last_tick_;
  m.dt = provisional_.dt;
  m.frame_count = frames_;
  m.action_count = actions_;
  for (const auto& a : store_.annotations(dir_)) m.annotations.push_back(a.annotation_id);
  for (const auto& r : store_.media(dir_)) m.media.push_back(r.media_id);
  m.contributors.assign(contributors_.begin(), contributors_.end());
  m.multi_writer = origins_.size() > 1;
  m.finalized = true;
  m.created_at = provisional_.created_at;

  io::write_atomic(dir_ / layout::kManifest, wire::encode_canonical(to_json(m)) + "\n");
  finalized_ = true;
  frames_log_.reset();
  actions_log_.reset();
  store_.release(session_id_);
  return m;
}

// ---------------------------------------------------------------- store

EpisodeStore::EpisodeStore(fs::path data_dir) : data_dir_(std::move(data_dir)) {
  std::error_code ec;
  fs::create_directories(episodes_dir(), ec);
  if (ec) throw StoreError(StoreError::Kind::storage, "cannot create " + episodes_dir().string() + ": " + ec.message());
}

fs::path EpisodeStore::episode_dir(const std::string& episode_id) const {
  if (!valid_id(episode_id)) throw StoreError(StoreError::Kind::unknown_target, "invalid episode id");
  return episodes_dir() / episode_id;
}

fs::path EpisodeStore::session_dir(const std::string& session_id) const {
  if (!valid_id(session_id)) throw StoreError(StoreError::Kind::unknown_target, "invalid session id");
  return data_dir_ / "sessions" / session_id;
}

std::unique_ptr<EpisodeWriter> EpisodeStore::open_episode(const SessionMeta& session, const std::string& label,
                                                          std::int64_t start_tick,
                                                          const sim::WorldState& start_state) {
  if (session.scene == nullptr || !session.scene->scene) {
    throw StoreError(StoreError::Kind::invalid_record, "session has no scene");
  }
  {
    std::lock_guard lock(mu_);
    if (!open_sessions_.insert(session.session_id).second) {
      throw StoreError(StoreError::Kind::already_open, "session " + session.session_id + " already has an open episode");
    }
  }
  try {
    const CatalogScene& cs = *session.scene;
    ProvisionalManifest p;
    p.episode_id = new_record_id();
    p.session_id = session.session_id;
    p.scene = cs.scene->spec.name;
    p.scene_digest = cs.scene_digest;
    p.robot = cs.scene->robot.name;
    p.robot_digest = cs.robot_digest;
    p.label = label;
    p.start_tick = start_tick;
    p.dt = sim::kTickDt.seconds();
    p.created_at = utc_now_ms();
    p.start_state = wire::world_state_to_json(start_state);

    const fs::path dir = episodes_dir() / p.episode_id;
    std::error_code ec;
    if (!fs::create_directory(dir, ec) || ec) {
      throw StoreError(StoreError::Kind::storage, "cannot create " + dir.string());
    }
    io::write_atomic(dir / layout::kSceneCopy, cs.scene_text);
    io::write_atomic(dir / layout::kRobotCopy, cs.robot_text);
    io::write_atomic(dir / layout::kProvisional, wire::encode_canonical(to_json(p)) + "\n");
    io::fsync_path(episodes_dir());
    std::string id = p.episode_id;
    return std::unique_ptr<EpisodeWriter>(new EpisodeWriter(*this, session.session_id, std::move(id), dir, std::move(p)));
  } catch (...) {
    release(session.session_id);
    throw;
  }
}

void EpisodeStore::release(const std::string& session_id) {
  std::lock_guard lock(mu_);
  open_sessions_.erase(session_id);
}

bool EpisodeStore::has_episode(const std::string& episode_id) const {
  if (!valid_id(episode_id)) return false;
  return fs::exists(episodes_dir() / episode_id / layout::kProvisional);
}

std::vector<std::string> EpisodeStore::episode_ids() const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(episodes_dir(), ec)) {
    if (entry.is_directory() && fs::exists(entry.path() / layout::kProvisional)) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> EpisodeStore::unfinalized_episodes() const {
  std::vector<std::string> out;
  for (const auto& id : episode_ids()) {
    if (!fs::exists(episodes_dir() / id / layout::kManifest)) out.push_back(id);
  }
  return out;
}

EpisodeManifest EpisodeStore::manifest(const std::string& episode_id) const {
  if (!has_episode(episode_id)) throw StoreError(StoreError::Kind::unknown_target, "no episode " + episode_id);
  std::lock_guard lock(log_mu_);
  return read_manifest(episode_dir(episode_id));
}

void EpisodeStore::append_annotation(const fs::path& dir, const AnnotationRecord& record) {
  std::lock_guard lock(log_mu_);
  fs::create_directories(dir);
  io::append_line(dir / layout::kAnnotations, wire::encode_canonical(to_json(record)));
}

void EpisodeStore::append_media(const fs::path& dir, const MediaRecord& record) {
  std::lock_guard lock(log_mu_);
  fs::create_directories(dir);
  io::append_line(dir / layout::kMedia, wire::encode_canonical(to_json(record)));
}

std::vector<AnnotationRecord> EpisodeStore::annotations(const fs::path& dir) const {
  std::lock_guard lock(log_mu_);
  return read_records<AnnotationRecord>(dir / layout::kAnnotations, annotation_from_json);
}

std::vector<MediaRecord> EpisodeStore::media(const fs::path& dir) const {
  std::lock_guard lock(log_mu_);
  return read_records<MediaRecord>(dir / layout::kMedia, media_from_json);
}

EpisodeManifest read_manifest(const fs::path& dir) {
  EpisodeManifest m;
  if (fs::exists(dir / layout::kManifest)) {
    m = manifest_from_json(wire::parse_text(io::read_file(dir / layout::kManifest)));
  } else {
    const ProvisionalManifest p = provisional_from_json(wire::parse_text(io::read_file(dir / layout::kProvisional)));
    m.episode_id = p.episode_id;
    m.session_id = p.session_id;
    m.scene = p.scene;
    m.scene_digest = p.scene_digest;
    m.robot = p.robot;
    m.robot_digest = p.robot_digest;
    m.label = p.label;
    m.start_tick = p.start_tick;
    m.dt = p.dt;
    m.created_at = p.created_at;
    m.finalized = false;
    // longest valid prefix of the frame log
    std::int64_t expect = p.start_tick;
    for (const auto& line : io::read_lines(dir / layout::kFrames)) {
      if (!line.terminated) break;
      try {
        if (wire::frame_from_json(wire::parse_text(line.text)).tick != expect) break;
      } catch (const wire::WireError&) {
        break;
      }
      ++expect;
    }
    m.end_tick = expect - 1;
    m.frame_count = expect - p.start_tick;
    std::set<std::string> origins;
    for (const auto& a : read_records<ActionEvent>(dir / layout::kActions, action_event_from_json)) {
      if (a.tick > m.end_tick) break;
      ++m.action_count;
      origins.insert(a.origin);
    }
    m.multi_writer = origins.size() > 1;
  }
  std::vector<std::string> ann;
  for (const auto& a : read_records<AnnotationRecord>(dir / layout::kAnnotations, annotation_from_json)) {
    ann.push_back(a.annotation_id);
  }
  merge_ids(m.annotations, ann);
  std::vector<std::string> media;
  std::vector<std::string> contributors;
  for (const auto& r : read_records<MediaRecord>(dir / layout::kMedia, media_from_json)) {
    media.push_back(r.media_id);
    if (!r.metadata.contributor.empty()) contributors.push_back(r.metadata.contributor);
  }
  merge_ids(m.media, media);
  merge_ids(m.contributors, contributors);
  return m;
}

}  // namespace demoforge::store
