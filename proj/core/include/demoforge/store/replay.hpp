#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "demoforge/sim/world.hpp"
#include "demoforge/store/catalog.hpp"

namespace demoforge::store {

/// Re-simulates an episode from its stored scene/robot copies and start
/// state, applying each recorded action before the step that produced the
/// first frame at its tick. Throws StoreError digest_mismatch when the
/// catalog's scene or robot no longer hashes to the recorded digests, and
/// validation_failed when the episode does not validate.
std::vector<sim::SimFrame> replay_episode(const std::filesystem::path& episode_dir, const Catalog& catalog);

struct ReplayCheck {
  bool equal = true;
  std::int64_t frames_compared = 0;
  std::optional<std::int64_t> first_divergent_tick;
  std::string detail;
};

/// replay_episode compared field-for-field against frames.log.
ReplayCheck check_replay(const std::filesystem::path& episode_dir, const Catalog& catalog);

}  // namespace demoforge::store
