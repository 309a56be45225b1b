#include "demoforge/store/replay.hpp"

#include "demoforge/store/digest.hpp"
#include "demoforge/store/episode_store.hpp"
#include "demoforge/store/records.hpp"
#include "demoforge/store/validate.hpp"
#include "demoforge/wire/json_io.hpp"
#include "file_io.hpp"

namespace demoforge::store {

namespace fs = std::filesystem;

namespace {

std::vector<sim::SimFrame> stored_frames(const fs::path& dir) {
  std::vector<sim::SimFrame> out;
  for (const auto& line : io::read_lines(dir / layout::kFrames)) {
    if (!line.terminated) break;
    out.push_back(wire::frame_from_json(wire::parse_text(line.text)));
  }
  return out;
}

}  // namespace

std::vector<sim::SimFrame> replay_episode(const fs::path& dir, const Catalog& catalog) {
  const ValidationReport report = validate_episode(dir);
  if (!report.ok) {
    const auto& e = report.errors.front();
    throw StoreError(StoreError::Kind::validation_failed, "episode invalid: " + e.locator + ": " + e.message);
  }
  const EpisodeManifest m = read_manifest(dir);
  const ProvisionalManifest p = provisional_from_json(wire::parse_text(io::read_file(dir / layout::kProvisional)));

  const CatalogScene* known = catalog.scene(p.scene);
  if (known == nullptr) {
    throw StoreError(StoreError::Kind::digest_mismatch, "scene '" + p.scene + "' is not in the catalog");
  }
  if (known->scene_digest != p.scene_digest) {
    throw StoreError(StoreError::Kind::digest_mismatch, "scene '" + p.scene + "' changed since recording");
  }
  if (known->robot_digest != p.robot_digest) {
    throw StoreError(StoreError::Kind::digest_mismatch, "robot '" + p.robot + "' changed since recording");
  }

  // Rebuild from the stored copies; validation already tied them to the digests.
  const kinematics::RobotModel robot = wire::robot_from_json(wire::parse_text(io::read_file(dir / layout::kRobotCopy)));
  const sim::ScenePtr scene =
      sim::make_scene(wire::scene_from_json(wire::parse_text(io::read_file(dir / layout::kSceneCopy))), robot);

  std::vector<ActionEvent> actions;
  for (const auto& line : io::read_lines(dir / layout::kActions)) {
    if (!line.terminated) break;
    ActionEvent a = action_event_from_json(wire::parse_text(line.text));
    if (a.tick > m.end_tick) break;
    actions.push_back(std::move(a));
  }

  sim::WorldState state = wire::world_state_from_json(p.start_state, scene);
  std::vector<sim::SimFrame> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, m.frame_count)));
  std::size_t next = 0;
  for (std::int64_t tick = m.start_tick; tick <= m.end_tick; ++tick) {
    for (; next < actions.size() && actions[next].tick == tick; ++next) {
      state = sim::apply_action(std::move(state), actions[next].payload);
    }
    auto [s, frame] = sim::step(std::move(state), sim::kTickDt);
    state = std::move(s);
    out.push_back(std::move(frame));
  }
  return out;
}

ReplayCheck check_replay(const fs::path& dir, const Catalog& catalog) {
  const std::vector<sim::SimFrame> replayed = replay_episode(dir, catalog);
  const std::vector<sim::SimFrame> stored = stored_frames(dir);
  ReplayCheck c;
  const std::size_t n = std::min(replayed.size(), stored.size());
  for (std::size_t i = 0; i < n; ++i) {
    ++c.frames_compared;
    if (!(replayed[i] == stored[i])) {
      c.equal = false;
      c.first_divergent_tick = stored[i].tick;
      c.detail = "stored " + wire::encode_canonical(wire::frame_to_json(stored[i])) + " replayed " +
                 wire::encode_canonical(wire::frame_to_json(replayed[i]));
      return c;
    }
  }
  if (replayed.size() != stored.size()) {
    c.equal = false;
    c.first_divergent_tick = n < stored.size() ? stored[n].tick : replayed[n].tick;
    c.detail = "frame count differs: stored " + std::to_string(stored.size()) + ", replayed " +
               std::to_string(replayed.size());
  }
  return c;
}

}  // namespace demoforge::store
