#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "demoforge/store/episode_store.hpp"

namespace demoforge::store {

struct ExportFilter {
  std::optional<std::string> scene;
  std::optional<std::string> robot;
  std::optional<std::string> label;
  bool finalized_only = true;
};

struct ExportResult {
  std::vector<std::string> episode_ids;
  std::vector<std::string> warnings;
};

/// Writes <out>/index.log (one {aligned, episode_id, manifest} record per
/// selected episode, by id) and <out>/<episode_id>.aligned.log (one row per
/// frame with the actions applied at that tick, or null). Output depends only
/// on the store contents.
ExportResult export_dataset(const EpisodeStore& store, const ExportFilter& filter, const std::filesystem::path& out);

bool matches(const ExportFilter& filter, const EpisodeManifest& manifest);

}  // namespace demoforge::store
