#include "demoforge/kinematics/kinematics.hpp"

#include <algorithm>

namespace demoforge::kinematics {

namespace {

struct JointFrame {
  Vector3 axis_world;
  Vector3 origin_world;
};

// Walks the chain once, returning the ee transform and filling per-joint
// frames (pre-motion axis/origin) and post-motion link transforms on request.
Eigen::Isometry3d walk_chain(const RobotModel& model, const JointConfig& q, std::vector<JointFrame>* frames,
                             std::vector<Pose>* links) {
  Eigen::Isometry3d t = model.base_pose.isometry();
  for (std::size_t i = 0; i < model.joints.size(); ++i) {
    const JointSpec& j = model.joints[i];
    t = t * j.origin.isometry();
    if (frames != nullptr) frames->push_back({t.linear() * j.axis, t.translation()});
    if (j.kind == JointKind::revolute) {
      t.rotate(Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], j.axis));
    } else {
      t.translate(j.axis * q[static_cast<Eigen::Index>(i)]);
    }
    if (links != nullptr) links->push_back(Pose::from_isometry(t));
  }
  return t * model.ee_offset.isometry();
}

}  // namespace

FkResult forward_kinematics(const RobotModel& model, const JointConfig& q) {
  require_length(model, q);
  FkResult out;
  out.link_poses.reserve(model.dof());
  out.ee_pose = Pose::from_isometry(walk_chain(model, q, nullptr, &out.link_poses));
  return out;
}

Jacobian jacobian(const RobotModel& model, const JointConfig& q) {
  require_length(model, q);
  std::vector<JointFrame> frames;
  frames.reserve(model.dof());
  const Vector3 p_ee = walk_chain(model, q, &frames, nullptr).translation();
  Jacobian jac(6, static_cast<Eigen::Index>(model.dof()));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const Vector3& z = frames[i].axis_world;
    if (model.joints[i].kind == JointKind::revolute) {
      jac.block<3, 1>(0, col) = z.cross(p_ee - frames[i].origin_world);
      jac.block<3, 1>(3, col) = z;
    } else {
      jac.block<3, 1>(0, col) = z;
      jac.block<3, 1>(3, col).setZero();
    }
  }
  return jac;
}

JointConfig clamp_to_limits(const RobotModel& model, const JointConfig& q) {
  require_length(model, q);
  JointConfig out = q;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[k] = std::clamp(q[k], model.joints[i].limit_lo, model.joints[i].limit_hi);
  }
  return out;
}

bool within_limits(const RobotModel& model, const JointConfig& q) {
  require_length(model, q);
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const double v = q[static_cast<Eigen::Index>(i)];
    if (!(v >= model.joints[i].limit_lo && v <= model.joints[i].limit_hi)) return false;
  }
  return true;
}

}  // namespace demoforge::kinematics
