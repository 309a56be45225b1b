#include "demoforge/kinematics/robot_model.hpp"

#include <cmath>
#include <set>

namespace demoforge::kinematics {

namespace {

Vector3 vec3(const config::Node& node, std::string_view field, const Vector3& fallback) {
  if (node.find(field) == nullptr) return fallback;
  const auto v = node.numbers(field, 3);
  return {v[0], v[1], v[2]};
}

Pose read_transform(const config::Node& node) {
  node.expect_only({"xyz", "rpy"});
  return Pose::from_xyz_rpy(vec3(node, "xyz", Vector3::Zero()), vec3(node, "rpy", Vector3::Zero()));
}

Pose optional_transform(const config::Node& parent, std::string_view field) {
  const config::Node* n = parent.find(field);
  return n == nullptr ? Pose::identity() : read_transform(*n);
}

JointSpec read_joint(const config::Node& node) {
  node.expect_only({"kind", "axis", "origin", "limit", "max_velocity"});
  JointSpec j;
  j.name = node.label_text(0);
  const std::string kind = node.text("kind");
  if (kind == "revolute") {
    j.kind = JointKind::revolute;
  } else if (kind == "prismatic") {
    j.kind = JointKind::prismatic;
  } else {
    node.require("kind").fail("joint kind must be revolute or prismatic, found '" + kind + "'");
  }
  j.axis = vec3(node, "axis", Vector3::Zero());
  if (node.find("axis") == nullptr) node.fail("missing field 'axis'");
  j.origin = read_transform(node.require("origin"));
  const config::Node& limit = node.require("limit");
  limit.expect_only({"lo", "hi"});
  j.limit_lo = limit.number("lo");
  j.limit_hi = limit.number("hi");
  j.max_velocity = node.number("max_velocity");
  return j;
}

}  // namespace

const char* to_string(JointKind kind) { return kind == JointKind::revolute ? "revolute" : "prismatic"; }

RobotModel load_robot_model(const config::Document& doc) {
  const config::Node& root = doc.root;
  root.expect_only({"name", "base_pose", "ee_offset", "joint"});
  RobotModel model;
  model.name = root.text("name");
  model.base_pose = optional_transform(root, "base_pose");
  model.ee_offset = optional_transform(root, "ee_offset");
  for (const config::Node* j : root.all("joint")) model.joints.push_back(read_joint(*j));
  try {
    validate(model);
  } catch (const KinematicsError& e) {
    throw KinematicsError(KinematicsError::Kind::semantic, root.source + ": " + e.what());
  }
  return model;
}

RobotModel load_robot_model(const std::filesystem::path& path) { return load_robot_model(config::parse_file(path)); }

void validate(const RobotModel& model) {
  auto fail = [](const std::string& msg) { throw KinematicsError(KinematicsError::Kind::semantic, msg); };
  if (model.name.empty()) fail("robot name is empty");
  if (model.joints.empty()) fail("robot '" + model.name + "' has no joints");
  if (!is_unit(model.base_pose.orientation)) fail("base_pose orientation is not a unit quaternion");
  if (!is_unit(model.ee_offset.orientation)) fail("ee_offset orientation is not a unit quaternion");
  std::set<std::string> names;
  for (const auto& j : model.joints) {
    if (!names.insert(j.name).second) fail("duplicate joint name '" + j.name + "'");
    if (!(j.limit_lo < j.limit_hi)) fail("joint '" + j.name + "' has limit lo >= hi");
    if (!j.axis.allFinite() || std::abs(j.axis.norm() - 1.0) > 1e-9) {
      fail("joint '" + j.name + "' axis must have unit norm");
    }
    if (!(j.max_velocity > 0.0) || !std::isfinite(j.max_velocity)) {
      fail("joint '" + j.name + "' max_velocity must be positive");
    }
    if (!is_unit(j.origin.orientation)) fail("joint '" + j.name + "' origin orientation is not unit");
  }
}

void require_length(const RobotModel& model, const JointConfig& q) {
  if (static_cast<std::size_t>(q.size()) != model.dof()) {
    throw KinematicsError(KinematicsError::Kind::length_mismatch,
                          "joint config has " + std::to_string(q.size()) + " values, robot '" + model.name +
                              "' has " + std::to_string(model.dof()) + " joints");
  }
}

}  // namespace demoforge::kinematics
