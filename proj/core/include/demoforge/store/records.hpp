#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "demoforge/sim/command.hpp"
#include "demoforge/wire/canonical.hpp"

namespace demoforge::store {

using wire::Json;

class StoreError : public std::runtime_error {
 public:
  enum class Kind {
    storage,
    already_open,
    tick_discontinuity,
    finalized,
    unknown_target,
    invalid_record,
    too_large,
    digest_mismatch,
    validation_failed,
  };
  StoreError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(StoreError::Kind kind);

enum class ActionKind { teleop, reset, gripper };

struct ActionEvent {
  std::int64_t tick = 0;
  sim::Action payload;
  std::int64_t client_seq = 0;
  /// Connection that issued the command, e.g. "c1".
  std::string origin;

  ActionKind kind() const;
  bool operator==(const ActionEvent&) const = default;
};

enum class AnnotationKind { task_description, procedure, constraint, rationale };

struct AnnotationRecord {
  std::string annotation_id;
  /// Episode or session id.
  std::string target;
  std::string author;
  std::string text;
  AnnotationKind kind = AnnotationKind::task_description;
  std::int64_t created_at = 0;  // UTC ms
  std::optional<std::pair<std::int64_t, std::int64_t>> anchor;

  bool operator==(const AnnotationRecord&) const = default;
};

enum class MediaSource { upload, sim_capture };

struct MediaMetadata {
  std::string scene;
  std::string embodiment;
  std::string task_label;
  std::string contributor;
  std::optional<double> duration_s;
  bool operator==(const MediaMetadata&) const = default;
};

struct MediaRecord {
  std::string media_id;
  std::string target;
  MediaSource source = MediaSource::upload;
  std::string content_digest;
  std::int64_t byte_length = 0;
  std::string declared_mime;
  MediaMetadata metadata;
  std::int64_t created_at = 0;
  bool operator==(const MediaRecord&) const = default;
};

/// Episode manifest. Stored immutably as `meta` on finalize; the
/// annotation/media/contributor lists of a served manifest also include
/// records appended after finalization.
struct EpisodeManifest {
  std::string episode_id;
  std::string session_id;
  std::string scene;
  std::string scene_digest;
  std::string robot;
  std::string robot_digest;
  std::string label;
  std::int64_t start_tick = 0;
  std::int64_t end_tick = 0;
  double dt = 0.0;
  std::int64_t frame_count = 0;
  std::int64_t action_count = 0;
  std::vector<std::string> annotations;
  std::vector<std::string> media;
  std::vector<std::string> contributors;
  bool multi_writer = false;
  bool finalized = false;
  std::int64_t created_at = 0;
};

/// Written at open, before any log record. Holds the full world state the
/// first recorded tick was stepped from, which is what replay starts from.
struct ProvisionalManifest {
  std::string episode_id;
  std::string session_id;
  std::string scene;
  std::string scene_digest;
  std::string robot;
  std::string robot_digest;
  std::string label;
  std::int64_t start_tick = 0;
  double dt = 0.0;
  std::int64_t created_at = 0;
  Json start_state;
};

Json to_json(const ActionEvent& a);
ActionEvent action_event_from_json(const Json& j);
Json to_json(const AnnotationRecord& a);
AnnotationRecord annotation_from_json(const Json& j);
Json to_json(const MediaRecord& m);
MediaRecord media_from_json(const Json& j);
Json to_json(const EpisodeManifest& m);
EpisodeManifest manifest_from_json(const Json& j);
Json to_json(const ProvisionalManifest& m);
ProvisionalManifest provisional_from_json(const Json& j);

const char* to_string(ActionKind k);
const char* to_string(AnnotationKind k);
std::optional<AnnotationKind> annotation_kind_from(const std::string& s);
const char* to_string(MediaSource s);

/// Wall-clock UTC milliseconds; metadata only, never used for alignment.
std::int64_t utc_now_ms();

/// "<UTC yyyymmddThhmmssmmmZ>-<8 hex>"; sortable by creation time.
std::string new_record_id(const std::string& prefix = "");

namespace layout {
inline constexpr const char* kProvisional = "meta.provisional";
inline constexpr const char* kManifest = "meta";
inline constexpr const char* kSceneCopy = "scene.copy";
inline constexpr const char* kRobotCopy = "robot.copy";
inline constexpr const char* kFrames = "frames.log";
inline constexpr const char* kActions = "actions.log";
inline constexpr const char* kAnnotations = "annotations.log";
inline constexpr const char* kMedia = "media.log";
inline constexpr const char* kMediaDir = "media";
}  // namespace layout

}  // namespace demoforge::store
