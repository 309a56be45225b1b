#pragma once

#include <Eigen/Geometry>

namespace demoforge::kinematics {

using Vector3 = Eigen::Vector3d;
using Quaternion = Eigen::Quaterniond;
using Twist = Eigen::Matrix<double, 6, 1>;

/// Rigid transform. Orientation is kept as a unit quaternion with a
/// non-negative scalar part after every normalizing operation.
struct Pose {
  Vector3 position = Vector3::Zero();
  Quaternion orientation = Quaternion::Identity();

  static Pose identity() { return {}; }
  static Pose from_xyz_rpy(const Vector3& xyz, const Vector3& rpy);

  Eigen::Isometry3d isometry() const;
  static Pose from_isometry(const Eigen::Isometry3d& t);

  Pose inverse() const;
  /// this ∘ rhs
  Pose compose(const Pose& rhs) const;

  /// Exact (bitwise-value) equality.
  bool operator==(const Pose& rhs) const {
    return position == rhs.position && orientation.coeffs() == rhs.orientation.coeffs();
  }
};

/// Unit norm, scalar part >= 0. Inputs already unit to rounding are not
/// renormalized, so canonical(canonical(q)) == canonical(q) bitwise.
Quaternion canonical(const Quaternion& q);

/// Intrinsic X-Y-Z: rotate about x, then the new y, then the new z.
Quaternion quaternion_from_rpy(const Vector3& rpy);

/// Rotation vector (axis * angle, angle in [0, pi]) of a rotation.
Vector3 rotation_vector(const Quaternion& q);
Quaternion from_rotation_vector(const Vector3& v);

/// 6-vector twist error taking `current` to `target`: position difference,
/// then the rotation vector of target * current^-1 (world frame).
Twist pose_error(const Pose& target, const Pose& current);

bool is_unit(const Quaternion& q, double tol = 1e-9);

}  // namespace demoforge::kinematics
