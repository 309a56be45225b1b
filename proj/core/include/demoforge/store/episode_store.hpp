#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "demoforge/sim/world.hpp"
#include "demoforge/store/catalog.hpp"
#include "demoforge/store/records.hpp"

namespace demoforge::store {

class EpisodeStore;
namespace io {
class AppendFile;
}

/// Identity of the session an episode is recorded from.
struct SessionMeta {
  std::string session_id;
  const CatalogScene* scene = nullptr;
};

/// Appends one episode's frame and action logs. Owned by a single session
/// loop; not thread-safe. Records are buffered and flushed at least every
/// kFlushFrames frames and on finalize.
class EpisodeWriter {
 public:
  static constexpr std::int64_t kFlushFrames = 60;

  ~EpisodeWriter();
  EpisodeWriter(const EpisodeWriter&) = delete;
  EpisodeWriter& operator=(const EpisodeWriter&) = delete;

  const std::string& episode_id() const { return episode_id_; }
  const std::filesystem::path& path() const { return dir_; }
  std::int64_t start_tick() const { return start_tick_; }
  /// Tick of the last appended frame, start_tick - 1 before the first one.
  std::int64_t last_tick() const { return last_tick_; }
  std::int64_t frame_count() const { return frames_; }
  std::int64_t action_count() const { return actions_; }
  bool finalized() const { return finalized_; }

  /// frame.tick must equal last_tick() + 1.
  void append_frame(const sim::SimFrame& frame);
  /// tick must lie in [start_tick, last_tick()] and not precede the previous action.
  void append_action(const ActionEvent& action);
  void append_annotation(const AnnotationRecord& record);
  void add_contributor(const std::string& contributor);

  /// Flushes, writes the manifest atomically and closes the writer.
  EpisodeManifest finalize();

  /// Pushes buffered records to the OS.
  void flush();

 private:
  friend class EpisodeStore;
  EpisodeWriter(EpisodeStore& store, std::string session_id, std::string episode_id, std::filesystem::path dir,
                ProvisionalManifest provisional);
  void require_open() const;

  EpisodeStore& store_;
  std::string session_id_;
  std::string episode_id_;
  std::filesystem::path dir_;
  ProvisionalManifest provisional_;
  std::unique_ptr<io::AppendFile> frames_log_;
  std::unique_ptr<io::AppendFile> actions_log_;
  std::string frame_buffer_;
  std::string action_buffer_;
  std::int64_t start_tick_ = 0;
  std::int64_t last_tick_ = 0;
  std::int64_t last_action_tick_ = 0;
  std::uint64_t last_seq_ = 0;
  std::int64_t frames_ = 0;
  std::int64_t actions_ = 0;
  std::int64_t unflushed_frames_ = 0;
  std::set<std::string> origins_;
  std::set<std::string> contributors_;
  bool finalized_ = false;
};

/// Directory-per-episode store rooted at <data_dir>/episodes.
class EpisodeStore {
 public:
  explicit EpisodeStore(std::filesystem::path data_dir);

  const std::filesystem::path& data_dir() const { return data_dir_; }
  std::filesystem::path episodes_dir() const { return data_dir_ / "episodes"; }
  std::filesystem::path episode_dir(const std::string& episode_id) const;
  std::filesystem::path session_dir(const std::string& session_id) const;

  /// Creates the episode directory, then the scene/robot copies and the
  /// provisional manifest, before any log record can be appended.
  std::unique_ptr<EpisodeWriter> open_episode(const SessionMeta& session, const std::string& label,
                                              std::int64_t start_tick, const sim::WorldState& start_state);

  bool has_episode(const std::string& episode_id) const;
  std::vector<std::string> episode_ids() const;

  /// Served manifest: the stored one (or one derived from the logs while not
  /// finalized) with annotation, media and contributor lists merged in.
  EpisodeManifest manifest(const std::string& episode_id) const;

  /// Appends to annotations.log / media.log under `dir` (an episode or
  /// session directory). Safe to call concurrently.
  void append_annotation(const std::filesystem::path& dir, const AnnotationRecord& record);
  void append_media(const std::filesystem::path& dir, const MediaRecord& record);

  std::vector<AnnotationRecord> annotations(const std::filesystem::path& dir) const;
  std::vector<MediaRecord> media(const std::filesystem::path& dir) const;

  /// Episodes that were opened but never finalized (e.g. after a crash).
  std::vector<std::string> unfinalized_episodes() const;

 private:
  friend class EpisodeWriter;
  void release(const std::string& session_id);

  std::filesystem::path data_dir_;
  mutable std::mutex mu_;
  std::set<std::string> open_sessions_;
  mutable std::mutex log_mu_;
};

/// Manifest view of an episode directory without a store (validate, export).
EpisodeManifest read_manifest(const std::filesystem::path& episode_dir);

}  // namespace demoforge::store
