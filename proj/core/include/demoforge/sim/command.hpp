#pragma once

#include <variant>

#include "demoforge/kinematics/pose.hpp"

namespace demoforge::sim {

enum class Gripper { open, closed };

const char* to_string(Gripper g);

/// Relative end-effector motion: translation in meters, then an intrinsic
/// roll/pitch/yaw rotation in radians applied in the world frame.
struct EeDelta {
  double dx = 0.0, dy = 0.0, dz = 0.0;
  double droll = 0.0, dpitch = 0.0, dyaw = 0.0;
  bool operator==(const EeDelta&) const = default;
};

/// Absolute end-effector target; the attachment point for external pose
/// sources such as gesture trackers.
struct PoseTarget {
  kinematics::Pose pose;
  bool operator==(const PoseTarget&) const = default;
};

struct GripperAction {
  Gripper desired = Gripper::open;
  bool operator==(const GripperAction&) const = default;
};

struct ResetAction {
  bool operator==(const ResetAction&) const = default;
};

using TeleopPayload = std::variant<EeDelta, PoseTarget, GripperAction>;
using Action = std::variant<EeDelta, PoseTarget, GripperAction, ResetAction>;

inline Action to_action(const TeleopPayload& p) {
  return std::visit([](const auto& v) -> Action { return v; }, p);
}

}  // namespace demoforge::sim
