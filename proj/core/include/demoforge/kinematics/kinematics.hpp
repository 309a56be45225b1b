#pragma once

#include <vector>

#include "demoforge/kinematics/pose.hpp"
#include "demoforge/kinematics/robot_model.hpp"

namespace demoforge::kinematics {

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

struct FkResult {
  Pose ee_pose;
  /// Frame of each joint after its motion, one per joint.
  std::vector<Pose> link_poses;
};

/// ee = base ∘ Π(origin_i ∘ motion_i(q_i)) ∘ ee_offset. Defined for any q,
/// joint limits are not consulted.
FkResult forward_kinematics(const RobotModel& model, const JointConfig& q);

/// Geometric Jacobian in the world frame. Rows are linear x,y,z then angular
/// x,y,z; column i is (z_i x (p_ee - p_i), z_i) for revolute joints and
/// (z_i, 0) for prismatic ones.
Jacobian jacobian(const RobotModel& model, const JointConfig& q);

/// Per-joint clamp into [limit_lo, limit_hi].
JointConfig clamp_to_limits(const RobotModel& model, const JointConfig& q);

bool within_limits(const RobotModel& model, const JointConfig& q);

}  // namespace demoforge::kinematics
