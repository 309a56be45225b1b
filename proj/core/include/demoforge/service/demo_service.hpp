#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "demoforge/service/session.hpp"
#include "demoforge/store/catalog.hpp"
#include "demoforge/store/episode_store.hpp"
#include "demoforge/store/media_store.hpp"

namespace demoforge::service {

/// Failure of a service operation. `code` is stable and machine-readable;
/// `status` is the HTTP status it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(std::string code, int status, const std::string& detail)
      : std::runtime_error(detail), code_(std::move(code)), status_(status) {}
  const std::string& code() const { return code_; }
  int status() const { return status_; }

 private:
  std::string code_;
  int status_;
};

struct MediaRequest {
  std::string target;
  std::string contributor;
  std::string declared_mime = "application/octet-stream";
  std::optional<std::string> declared_digest;
  store::MediaSource source = store::MediaSource::upload;
  std::optional<std::string> task_label;
  std::optional<double> duration_s;
};

struct AnnotationRequest {
  std::string target;
  std::string author;
  std::string kind;
  std::string text;
  std::optional<std::pair<std::int64_t, std::int64_t>> anchor;
};

struct UploadResult {
  store::MediaRecord record;
  bool created = true;
};

class DemoService {
 public:
  DemoService(store::Catalog catalog, const std::filesystem::path& data_dir, std::int64_t max_sessions = 32,
              std::int64_t media_cap_bytes = store::kDefaultMediaCapBytes);
  ~DemoService();
  DemoService(const DemoService&) = delete;
  DemoService& operator=(const DemoService&) = delete;

  const store::Catalog& catalog() const { return catalog_; }
  store::EpisodeStore& store() { return store_; }
  std::int64_t max_sessions() const { return max_sessions_; }
  std::int64_t media_cap_bytes() const { return media_.cap_bytes(); }

  SessionDescriptor create_session(const std::string& scene, const std::string& robot,
                                   ClockMode clock = ClockMode::realtime);
  std::vector<SessionDescriptor> list_sessions() const;
  /// Live session or ServiceError unknown_session / session_closed.
  std::shared_ptr<Session> session(const std::string& id) const;
  SessionDescriptor describe_session(const std::string& id) const;
  SessionDescriptor close_session(const std::string& id);

  RecordingResult start_recording(const std::string& session_id, const std::string& label,
                                  const std::string& contributor);
  RecordingResult stop_recording(const std::string& session_id);
  std::int64_t advance(const std::string& session_id, std::int64_t ticks);

  store::AnnotationRecord submit_annotation(const AnnotationRequest& request);
  UploadResult upload_media(const MediaRequest& request, std::string_view bytes);

  std::vector<store::EpisodeManifest> list_episodes() const;
  store::EpisodeManifest get_episode(const std::string& episode_id) const;
  std::filesystem::path episode_frames_path(const std::string& episode_id) const;

  /// Episodes left unfinalized by an earlier crash; they stay as
  /// truncated-but-valid records and are reported once at startup.
  std::vector<std::string> recover();

  /// Closes every session, finalizing open recordings.
  void shutdown();

 private:
  struct Target {
    std::filesystem::path dir;
    std::string scene;
    std::string robot;
    std::string label;
    std::int64_t first_tick = 0;
    std::optional<std::int64_t> last_tick;
  };
  Target resolve_target(const std::string& target) const;

  store::Catalog catalog_;
  store::EpisodeStore store_;
  store::MediaStore media_;
  const std::int64_t max_sessions_;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t session_counter_ = 0;
};

}  // namespace demoforge::service
