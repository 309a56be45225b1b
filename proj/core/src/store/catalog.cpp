#include "demoforge/store/catalog.hpp"

#include <algorithm>

#include "demoforge/store/digest.hpp"
#include "demoforge/wire/json_io.hpp"

namespace demoforge::store {

namespace {

std::vector<std::filesystem::path> files_with_extension(const std::filesystem::path& dir, const std::string& ext) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string canonical_scene_text(const sim::SceneSpec& spec) { return wire::encode_canonical(wire::scene_to_json(spec)); }

std::string canonical_robot_text(const kinematics::RobotModel& model) {
  return wire::encode_canonical(wire::robot_to_json(model));
}

Catalog Catalog::load(const std::filesystem::path& assets_dir) {
  Catalog c;
  for (const auto& p : files_with_extension(assets_dir / "robots", ".robot")) {
    c.add_robot(kinematics::load_robot_model(p));
  }
  for (const auto& p : files_with_extension(assets_dir / "scenes", ".scene")) {
    c.add_scene(sim::load_scene_spec(p, c.models_));
  }
  return c;
}

void Catalog::add_robot(kinematics::RobotModel model) { models_.add(std::move(model)); }

const CatalogScene& Catalog::add_scene(const sim::ScenePtr& scene) {
  if (models_.find(scene->robot.name) == nullptr) {
    throw sim::SceneError(sim::SceneError::Kind::unknown_robot, "robot '" + scene->robot.name + "' is not registered");
  }
  CatalogScene entry;
  entry.scene = scene;
  entry.scene_text = canonical_scene_text(scene->spec);
  entry.robot_text = canonical_robot_text(scene->robot);
  entry.scene_digest = sha256_hex(entry.scene_text);
  entry.robot_digest = sha256_hex(entry.robot_text);
  auto [it, inserted] = scenes_.insert_or_assign(scene->spec.name, std::move(entry));
  return it->second;
}

const CatalogScene* Catalog::scene(const std::string& name) const {
  const auto it = scenes_.find(name);
  return it == scenes_.end() ? nullptr : &it->second;
}

const kinematics::RobotModel* Catalog::robot(const std::string& name) const { return models_.find(name); }

}  // namespace demoforge::store
