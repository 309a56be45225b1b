#include "demoforge/store/validate.hpp"

#include <optional>

#include "demoforge/store/digest.hpp"
#include "demoforge/store/records.hpp"
#include "demoforge/wire/json_io.hpp"
#include "file_io.hpp"

namespace demoforge::store {

namespace fs = std::filesystem;

void ValidationReport::warn(std::string locator, std::string message) {
  warnings.push_back({std::move(locator), std::move(message)});
}

void ValidationReport::error(std::string locator, std::string message) {
  errors.push_back({std::move(locator), std::move(message)});
  ok = false;
}

namespace {

std::string at(const char* file, int line) { return std::string(file) + ":" + std::to_string(line); }

// Unterminated last line: a torn append while open, corruption once finalized.
bool check_tail(const io::Line& line, const char* file, bool finalized, ValidationReport& r) {
  if (line.terminated) return true;
  if (finalized) {
    r.error(at(file, line.number), "unterminated record");
  } else {
    r.warn(at(file, line.number), "torn trailing record ignored");
  }
  return false;
}

}  // namespace

ValidationReport validate_episode(const fs::path& dir) {
  ValidationReport r;
  if (!fs::is_directory(dir)) {
    r.error(dir.string(), "not a directory");
    return r;
  }

  std::optional<ProvisionalManifest> prov;
  try {
    prov = provisional_from_json(wire::parse_text(io::read_file(dir / layout::kProvisional)));
  } catch (const std::exception& e) {
    r.error(layout::kProvisional, e.what());
    return r;
  }

  std::optional<EpisodeManifest> meta;
  if (fs::exists(dir / layout::kManifest)) {
    try {
      meta = manifest_from_json(wire::parse_text(io::read_file(dir / layout::kManifest)));
    } catch (const std::exception& e) {
      r.error(layout::kManifest, e.what());
    }
  }
  const bool finalized = fs::exists(dir / layout::kManifest);
  if (!finalized) r.warn(layout::kManifest, "episode not finalized");

  if (prov->episode_id != dir.filename().string()) {
    r.error(layout::kProvisional, "episode_id does not match directory name");
  }

  try {
    if (sha256_hex(io::read_file(dir / layout::kSceneCopy)) != prov->scene_digest) {
      r.error(layout::kSceneCopy, "scene digest does not match the stored copy");
    }
  } catch (const std::exception& e) {
    r.error(layout::kSceneCopy, e.what());
  }
  try {
    if (sha256_hex(io::read_file(dir / layout::kRobotCopy)) != prov->robot_digest) {
      r.error(layout::kRobotCopy, "robot digest does not match the stored copy");
    }
  } catch (const std::exception& e) {
    r.error(layout::kRobotCopy, e.what());
  }

  // frames
  std::int64_t expect = prov->start_tick;
  std::optional<std::uint64_t> last_seq;
  std::int64_t frame_count = 0;
  for (const auto& line : io::read_lines(dir / layout::kFrames)) {
    if (!check_tail(line, layout::kFrames, finalized, r)) break;
    sim::SimFrame f;
    try {
      f = wire::frame_from_json(wire::parse_text(line.text));
    } catch (const std::exception& e) {
      r.error(at(layout::kFrames, line.number), e.what());
      ++expect;
      continue;
    }
    if (f.tick != expect) {
      r.error(at(layout::kFrames, line.number),
              "tick " + std::to_string(f.tick) + ", expected " + std::to_string(expect));
    }
    if (f.sim_time != sim::sim_time_of(f.tick)) {
      r.error(at(layout::kFrames, line.number), "sim_time does not match tick");
    }
    if (last_seq && f.seq <= *last_seq) r.error(at(layout::kFrames, line.number), "seq not strictly increasing");
    last_seq = f.seq;
    expect = f.tick + 1;
    ++frame_count;
  }
  const std::int64_t last_tick = expect - 1;

  // actions
  std::int64_t action_count = 0;
  std::int64_t prev_tick = prov->start_tick;
  for (const auto& line : io::read_lines(dir / layout::kActions)) {
    if (!check_tail(line, layout::kActions, finalized, r)) break;
    ActionEvent a;
    try {
      a = action_event_from_json(wire::parse_text(line.text));
    } catch (const std::exception& e) {
      r.error(at(layout::kActions, line.number), e.what());
      continue;
    }
    ++action_count;
    if (a.tick < prev_tick) r.error(at(layout::kActions, line.number), "action ticks decrease");
    prev_tick = std::max(prev_tick, a.tick);
    if (a.tick < prov->start_tick) {
      r.error(at(layout::kActions, line.number), "action before start_tick");
    } else if (a.tick > last_tick) {
      if (finalized) {
        r.error(at(layout::kActions, line.number), "action tick has no frame");
      } else {
        r.warn(at(layout::kActions, line.number), "action beyond the last frame of an unfinalized episode");
        --action_count;
      }
    }
  }

  // manifest consistency
  if (meta) {
    const auto& m = *meta;
    if (!m.finalized) r.error(layout::kManifest, "manifest present but finalized=false");
    if (m.frame_count != frame_count) r.error(layout::kManifest, "frame_count does not match frames.log");
    if (m.action_count != action_count) r.error(layout::kManifest, "action_count does not match actions.log");
    if (m.start_tick != prov->start_tick) r.error(layout::kManifest, "start_tick differs from provisional manifest");
    if (m.end_tick != last_tick) r.error(layout::kManifest, "end_tick does not match frames.log");
    if (m.frame_count != m.end_tick - m.start_tick + 1) r.error(layout::kManifest, "frame_count != end_tick - start_tick + 1");
    if (m.episode_id != prov->episode_id || m.scene_digest != prov->scene_digest ||
        m.robot_digest != prov->robot_digest || m.session_id != prov->session_id) {
      r.error(layout::kManifest, "identity fields differ from provisional manifest");
    }
  }

  // annotations
  for (const auto& line : io::read_lines(dir / layout::kAnnotations)) {
    if (!check_tail(line, layout::kAnnotations, false, r)) break;
    try {
      const AnnotationRecord a = annotation_from_json(wire::parse_text(line.text));
      if (a.target != prov->episode_id) r.error(at(layout::kAnnotations, line.number), "annotation target mismatch");
      if (a.anchor) {
        const auto [t0, t1] = *a.anchor;
        if (t0 > t1 || t0 < prov->start_tick || t1 > last_tick) {
          if (finalized) {
            r.error(at(layout::kAnnotations, line.number), "anchor outside the episode tick range");
          } else {
            r.warn(at(layout::kAnnotations, line.number), "anchor outside the recorded tick range");
          }
        }
      }
    } catch (const std::exception& e) {
      r.error(at(layout::kAnnotations, line.number), e.what());
    }
  }

  // media
  for (const auto& line : io::read_lines(dir / layout::kMedia)) {
    if (!check_tail(line, layout::kMedia, false, r)) break;
    try {
      const MediaRecord m = media_from_json(wire::parse_text(line.text));
      const fs::path blob = dir / layout::kMediaDir / m.content_digest;
      if (!is_sha256_hex(m.content_digest)) {
        r.error(at(layout::kMedia, line.number), "content_digest is not a SHA-256 hex string");
      } else if (!fs::exists(blob)) {
        r.error(at(layout::kMedia, line.number), "media blob missing");
      } else if (sha256_file_hex(blob) != m.content_digest) {
        r.error(at(layout::kMedia, line.number), "media blob digest mismatch");
      } else if (static_cast<std::int64_t>(fs::file_size(blob)) != m.byte_length) {
        r.error(at(layout::kMedia, line.number), "media byte_length mismatch");
      }
    } catch (const std::exception& e) {
      r.error(at(layout::kMedia, line.number), e.what());
    }
  }
  return r;
}

wire::Json to_json(const ValidationReport& report) {
  auto list = [](const std::vector<ValidationIssue>& v) {
    wire::Json out = wire::Json::array();
    for (const auto& i : v) out.push_back(wire::Json{{"locator", i.locator}, {"message", i.message}});
    return out;
  };
  return wire::Json{{"errors", list(report.errors)}, {"ok", report.ok}, {"warnings", list(report.warnings)}};
}

}  // namespace demoforge::store
