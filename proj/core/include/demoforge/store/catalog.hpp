#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "demoforge/sim/scene.hpp"

namespace demoforge::store {

/// A scene as the catalog serves it: the validated scene plus the canonical
/// texts (and their SHA-256) that get copied into every episode recorded on it.
struct CatalogScene {
  sim::ScenePtr scene;
  std::string scene_text;
  std::string robot_text;
  std::string scene_digest;
  std::string robot_digest;
};

/// Robot and scene registry, normally loaded from an assets directory laid
/// out as robots/*.robot and scenes/*.scene.
class Catalog {
 public:
  static Catalog load(const std::filesystem::path& assets_dir);

  void add_robot(kinematics::RobotModel model);
  /// Registers a validated scene; its robot must already be registered.
  const CatalogScene& add_scene(const sim::ScenePtr& scene);

  const CatalogScene* scene(const std::string& name) const;
  const kinematics::RobotModel* robot(const std::string& name) const;

  const std::map<std::string, CatalogScene>& scenes() const { return scenes_; }
  const sim::ModelRegistry& models() const { return models_; }

 private:
  sim::ModelRegistry models_;
  std::map<std::string, CatalogScene> scenes_;
};

/// Canonical text of a scene/robot as stored in episode copies.
std::string canonical_scene_text(const sim::SceneSpec& spec);
std::string canonical_robot_text(const kinematics::RobotModel& model);

}  // namespace demoforge::store
