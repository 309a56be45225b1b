#include "demoforge/store/export.hpp"

#include <map>

#include "demoforge/store/records.hpp"
#include "demoforge/wire/json_io.hpp"
#include "file_io.hpp"

namespace demoforge::store {

namespace fs = std::filesystem;

bool matches(const ExportFilter& f, const EpisodeManifest& m) {
  if (f.scene && *f.scene != m.scene) return false;
  if (f.robot && *f.robot != m.robot) return false;
  if (f.label && *f.label != m.label) return false;
  if (f.finalized_only && !m.finalized) return false;
  return true;
}

namespace {

std::string aligned_rows(const fs::path& dir, const EpisodeManifest& m) {
  std::map<std::int64_t, Json> actions;
  for (const auto& line : io::read_lines(dir / layout::kActions)) {
    if (!line.terminated) break;
    const ActionEvent a = action_event_from_json(wire::parse_text(line.text));
    if (a.tick > m.end_tick) break;
    auto& slot = actions[a.tick];
    if (slot.is_null()) slot = Json::array();
    slot.push_back(to_json(a));
  }
  std::string out;
  for (const auto& line : io::read_lines(dir / layout::kFrames)) {
    if (!line.terminated) break;
    Json row = wire::frame_to_json(wire::frame_from_json(wire::parse_text(line.text)));
    const std::int64_t tick = row["tick"].get<std::int64_t>();
    if (tick > m.end_tick) break;
    row.erase("t");
    const auto it = actions.find(tick);
    row["action"] = it == actions.end() ? Json(nullptr) : it->second;
    out += wire::encode_canonical(row);
    out += '\n';
  }
  return out;
}

}  // namespace

ExportResult export_dataset(const EpisodeStore& store, const ExportFilter& filter, const fs::path& out) {
  ExportResult result;
  fs::create_directories(out);
  std::string index;
  for (const auto& id : store.episode_ids()) {
    EpisodeManifest m;
    try {
      m = store.manifest(id);
    } catch (const std::exception& e) {
      result.warnings.push_back("skipping " + id + ": " + e.what());
      continue;
    }
    if (!matches(filter, m)) continue;
    const std::string aligned = id + ".aligned.log";
    io::write_atomic(out / aligned, aligned_rows(store.episode_dir(id), m));
    index += wire::encode_canonical(Json{{"aligned", aligned}, {"episode_id", id}, {"manifest", to_json(m)}});
    index += '\n';
    result.episode_ids.push_back(id);
  }
  if (result.episode_ids.empty()) result.warnings.push_back("no episodes matched the filter");
  io::write_atomic(out / "index.log", index);
  return result;
}

}  // namespace demoforge::store
