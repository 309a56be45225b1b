#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "demoforge/store/episode_store.hpp"
#include "demoforge/store/records.hpp"

namespace demoforge::store {

inline constexpr std::int64_t kDefaultMediaCapBytes = std::int64_t{256} * 1024 * 1024;

struct MediaUpload {
  /// Episode or session id; `target_dir` is where its media.log lives.
  std::string target;
  std::filesystem::path target_dir;
  MediaSource source = MediaSource::upload;
  std::string declared_mime = "application/octet-stream";
  std::optional<std::string> declared_digest;
  MediaMetadata metadata;
};

/// Content-addressed blobs under <data_dir>/blobs/<sha256>, hard-linked into
/// the target's media/ directory.
class MediaStore {
 public:
  MediaStore(EpisodeStore& episodes, std::int64_t cap_bytes = kDefaultMediaCapBytes);

  std::int64_t cap_bytes() const { return cap_bytes_; }
  std::filesystem::path blobs_dir() const { return episodes_.data_dir() / "blobs"; }

  /// Stores `bytes` for upload.target. Re-uploading bytes already attached
  /// to the target returns the existing record; nothing new is written.
  /// Throws StoreError too_large / invalid_record / digest_mismatch before
  /// anything is persisted.
  MediaRecord put(const MediaUpload& upload, std::string_view bytes, bool* created = nullptr);

  static std::string media_id_for(const std::string& digest) { return "md-" + digest.substr(0, 16); }

 private:
  EpisodeStore& episodes_;
  std::int64_t cap_bytes_;
  std::mutex mu_;
};

}  // namespace demoforge::store
