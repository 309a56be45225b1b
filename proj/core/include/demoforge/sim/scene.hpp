#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "demoforge/config/document.hpp"
#include "demoforge/kinematics/robot_model.hpp"

namespace demoforge::sim {

using kinematics::JointConfig;
using kinematics::Pose;
using kinematics::RobotModel;
using kinematics::Vector3;

struct Aabb {
  Vector3 min = Vector3::Zero();
  Vector3 max = Vector3::Zero();

  bool contains(const Vector3& p) const;
  Vector3 clamp(const Vector3& p) const;
  bool operator==(const Aabb&) const = default;
};

enum class Shape { box, sphere };

struct ObjectSpec {
  std::string id;
  Shape shape = Shape::box;
  /// Box edge lengths, or {radius, radius, radius} for spheres.
  Vector3 dimensions = Vector3::Zero();
  Pose initial_pose;
  bool graspable = false;

  bool operator==(const ObjectSpec&) const = default;
};

struct SceneSpec {
  std::string name;
  std::string robot;
  JointConfig robot_initial;
  std::vector<ObjectSpec> objects;  // sorted by id
  Aabb workspace;
  std::optional<std::string> task_prompt;
  std::optional<Aabb> goal_region;
  /// Orientation weight handed to the tracking IK; 0 tracks position only.
  double orientation_weight = 1.0;
};

class SceneError : public std::runtime_error {
 public:
  enum class Kind { unknown_robot, schema, out_of_bounds, invalid };
  SceneError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Name -> robot model.
class ModelRegistry {
 public:
  void add(RobotModel model);
  const RobotModel* find(const std::string& name) const;
  const std::map<std::string, RobotModel>& models() const { return models_; }

 private:
  std::map<std::string, RobotModel> models_;
};

/// Immutable bundle a world runs against.
struct Scene {
  SceneSpec spec;
  RobotModel robot;
};

using ScenePtr = std::shared_ptr<const Scene>;

/// Parses and validates a scene document against the registry. Checks object
/// id uniqueness, robot_initial length and limits, and that every initial
/// pose (objects and end effector) lies inside the workspace bounds.
ScenePtr load_scene_spec(const config::Document& doc, const ModelRegistry& models);
ScenePtr load_scene_spec(const std::filesystem::path& path, const ModelRegistry& models);

/// Validation shared with scenes reconstructed from stored copies.
ScenePtr make_scene(SceneSpec spec, const RobotModel& robot);

const char* to_string(Shape s);

}  // namespace demoforge::sim
