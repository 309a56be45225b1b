#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "demoforge/config/document.hpp"
#include "demoforge/kinematics/pose.hpp"

namespace demoforge::kinematics {

using JointConfig = Eigen::VectorXd;

enum class JointKind { revolute, prismatic };

const char* to_string(JointKind kind);

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::revolute;
  Vector3 axis = Vector3::UnitZ();
  Pose origin;
  double limit_lo = 0.0;
  double limit_hi = 0.0;
  double max_velocity = 1.0;

  bool operator==(const JointSpec&) const = default;
};

struct RobotModel {
  std::string name;
  std::vector<JointSpec> joints;
  Pose base_pose;
  Pose ee_offset;

  std::size_t dof() const { return joints.size(); }
  bool operator==(const RobotModel&) const = default;
};

class KinematicsError : public std::runtime_error {
 public:
  enum class Kind { schema, semantic, length_mismatch, non_finite, invalid_params };

  KinematicsError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Reads a robot-spec document. Syntax and field-type problems surface as
/// config::ParseError; invariant violations (duplicate names, empty limit
/// range, non-unit axis) as KinematicsError::Kind::semantic.
RobotModel load_robot_model(const config::Document& doc);
RobotModel load_robot_model(const std::filesystem::path& path);

/// Throws KinematicsError(semantic) describing the first violated invariant.
void validate(const RobotModel& model);

void require_length(const RobotModel& model, const JointConfig& q);

}  // namespace demoforge::kinematics
