#include "demoforge/sim/scene.hpp"

#include <algorithm>
#include <set>

#include "demoforge/kinematics/kinematics.hpp"

namespace demoforge::sim {

namespace {

Vector3 vec3(const config::Node& node, std::string_view field) {
  const auto v = node.numbers(field, 3);
  return {v[0], v[1], v[2]};
}

Aabb read_box(const config::Node& node) {
  node.expect_only({"min", "max"});
  return {vec3(node, "min"), vec3(node, "max")};
}

ObjectSpec read_object(const config::Node& node) {
  node.expect_only({"shape", "size", "radius", "xyz", "rpy", "graspable"});
  ObjectSpec o;
  o.id = node.label_text(0);
  const std::string shape = node.text("shape");
  if (shape == "box") {
    o.shape = Shape::box;
    o.dimensions = vec3(node, "size");
  } else if (shape == "sphere") {
    o.shape = Shape::sphere;
    const double r = node.number("radius");
    o.dimensions = Vector3::Constant(r);
  } else {
    node.require("shape").fail("shape must be box or sphere, found '" + shape + "'");
  }
  const Vector3 rpy = node.find("rpy") != nullptr ? vec3(node, "rpy") : Vector3::Zero();
  o.initial_pose = Pose::from_xyz_rpy(vec3(node, "xyz"), rpy);
  o.graspable = node.optional_boolean("graspable").value_or(false);
  return o;
}

std::string fmt_vec(const Vector3& v) {
  return "(" + std::to_string(v.x()) + ", " + std::to_string(v.y()) + ", " + std::to_string(v.z()) + ")";
}

}  // namespace

bool Aabb::contains(const Vector3& p) const {
  return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
}

Vector3 Aabb::clamp(const Vector3& p) const { return p.cwiseMax(min).cwiseMin(max); }

void ModelRegistry::add(RobotModel model) {
  const std::string name = model.name;
  models_.insert_or_assign(name, std::move(model));
}

const RobotModel* ModelRegistry::find(const std::string& name) const {
  const auto it = models_.find(name);
  return it == models_.end() ? nullptr : &it->second;
}

const char* to_string(Shape s) { return s == Shape::box ? "box" : "sphere"; }

ScenePtr make_scene(SceneSpec spec, const RobotModel& robot) {
  using K = SceneError::Kind;
  if (spec.name.empty()) throw SceneError(K::invalid, "scene name is empty");
  if (spec.robot != robot.name) {
    throw SceneError(K::unknown_robot, "scene '" + spec.name + "' expects robot '" + spec.robot + "'");
  }
  if (!((spec.workspace.min.array() < spec.workspace.max.array()).all())) {
    throw SceneError(K::invalid, "workspace bounds must satisfy min < max on every axis");
  }
  if (static_cast<std::size_t>(spec.robot_initial.size()) != robot.dof()) {
    throw SceneError(K::invalid, "robot_initial has " + std::to_string(spec.robot_initial.size()) +
                                     " values, robot '" + robot.name + "' has " + std::to_string(robot.dof()));
  }
  if (!kinematics::within_limits(robot, spec.robot_initial)) {
    throw SceneError(K::invalid, "robot_initial is outside the joint limits");
  }
  if (!(spec.orientation_weight >= 0.0)) throw SceneError(K::invalid, "orientation_weight must be >= 0");

  std::sort(spec.objects.begin(), spec.objects.end(),
            [](const ObjectSpec& a, const ObjectSpec& b) { return a.id < b.id; });
  std::set<std::string> ids;
  for (const auto& o : spec.objects) {
    if (!ids.insert(o.id).second) throw SceneError(K::invalid, "duplicate object id '" + o.id + "'");
    if (!((o.dimensions.array() > 0.0).all())) {
      throw SceneError(K::invalid, "object '" + o.id + "' dimensions must be positive");
    }
    if (!spec.workspace.contains(o.initial_pose.position)) {
      throw SceneError(K::out_of_bounds, "object '" + o.id + "' initial position " +
                                             fmt_vec(o.initial_pose.position) + " is outside the workspace");
    }
  }
  const Vector3 ee = kinematics::forward_kinematics(robot, spec.robot_initial).ee_pose.position;
  if (!spec.workspace.contains(ee)) {
    throw SceneError(K::out_of_bounds, "initial end-effector position " + fmt_vec(ee) + " is outside the workspace");
  }
  return std::make_shared<const Scene>(Scene{std::move(spec), robot});
}

ScenePtr load_scene_spec(const config::Document& doc, const ModelRegistry& models) {
  const config::Node& root = doc.root;
  root.expect_only({"name", "robot", "robot_initial", "task_prompt", "orientation_weight", "workspace", "object", "goal"});
  SceneSpec spec;
  spec.name = root.text("name");
  spec.robot = root.text("robot");
  const auto initial = root.numbers("robot_initial");
  spec.robot_initial = Eigen::Map<const Eigen::VectorXd>(initial.data(), static_cast<Eigen::Index>(initial.size()));
  spec.task_prompt = root.optional_text("task_prompt");
  spec.orientation_weight = root.optional_number("orientation_weight").value_or(1.0);
  spec.workspace = read_box(root.require("workspace"));
  if (const config::Node* goal = root.find("goal")) spec.goal_region = read_box(*goal);
  for (const config::Node* o : root.all("object")) spec.objects.push_back(read_object(*o));

  const RobotModel* robot = models.find(spec.robot);
  if (robot == nullptr) {
    throw SceneError(SceneError::Kind::unknown_robot,
                     root.source + ": scene '" + spec.name + "' references unknown robot '" + spec.robot + "'");
  }
  try {
    return make_scene(std::move(spec), *robot);
  } catch (const SceneError& e) {
    throw SceneError(e.kind(), root.source + ": " + e.what());
  }
}

ScenePtr load_scene_spec(const std::filesystem::path& path, const ModelRegistry& models) {
  return load_scene_spec(config::parse_file(path), models);
}

}  // namespace demoforge::sim
