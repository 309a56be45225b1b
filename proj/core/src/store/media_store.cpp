#include "demoforge/store/media_store.hpp"

#include <algorithm>
#include <cctype>

#include "demoforge/store/digest.hpp"
#include "file_io.hpp"

namespace demoforge::store {

namespace fs = std::filesystem;

MediaStore::MediaStore(EpisodeStore& episodes, std::int64_t cap_bytes) : episodes_(episodes), cap_bytes_(cap_bytes) {
  if (cap_bytes_ <= 0) throw StoreError(StoreError::Kind::invalid_record, "media cap must be positive");
}

MediaRecord MediaStore::put(const MediaUpload& upload, std::string_view bytes, bool* created) {
  if (created != nullptr) *created = false;
  const auto size = static_cast<std::int64_t>(bytes.size());
  if (size == 0) throw StoreError(StoreError::Kind::invalid_record, "empty media body");
  if (size > cap_bytes_) {
    throw StoreError(StoreError::Kind::too_large,
                     "media of " + std::to_string(size) + " bytes exceeds cap " + std::to_string(cap_bytes_));
  }
  const std::string digest = sha256_hex(bytes);
  if (upload.declared_digest) {
    std::string declared = *upload.declared_digest;
    std::transform(declared.begin(), declared.end(), declared.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (declared != digest) throw StoreError(StoreError::Kind::digest_mismatch, "declared digest does not match body");
  }

  std::lock_guard lock(mu_);
  for (const auto& existing : episodes_.media(upload.target_dir)) {
    if (existing.content_digest == digest) return existing;
  }

  fs::create_directories(blobs_dir());
  const fs::path blob = blobs_dir() / digest;
  if (!fs::exists(blob)) io::write_atomic(blob, bytes);

  const fs::path media_dir = upload.target_dir / layout::kMediaDir;
  fs::create_directories(media_dir);
  const fs::path link = media_dir / digest;
  if (!fs::exists(link)) {
    std::error_code ec;
    fs::create_hard_link(blob, link, ec);
    if (ec) io::write_atomic(link, bytes);  // cross-device data dir layouts
  }

  MediaRecord rec;
  rec.media_id = media_id_for(digest);
  rec.target = upload.target;
  rec.source = upload.source;
  rec.content_digest = digest;
  rec.byte_length = size;
  rec.declared_mime = upload.declared_mime;
  rec.metadata = upload.metadata;
  rec.created_at = utc_now_ms();
  episodes_.append_media(upload.target_dir, rec);
  if (created != nullptr) *created = true;
  return rec;
}

}  // namespace demoforge::store
