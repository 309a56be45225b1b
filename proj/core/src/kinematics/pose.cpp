#include "demoforge/kinematics/pose.hpp"

#include <cmath>

namespace demoforge::kinematics {

Quaternion canonical(const Quaternion& q) {
  // Values already unit to within rounding keep their exact bits.
  Quaternion out = std::abs(q.squaredNorm() - 1.0) <= 4e-16 ? q : q.normalized();
  if (out.w() < 0.0) out.coeffs() = -out.coeffs();
  return out;
}

Quaternion quaternion_from_rpy(const Vector3& rpy) {
  const Quaternion q = Eigen::AngleAxisd(rpy.x(), Vector3::UnitX()) * Eigen::AngleAxisd(rpy.y(), Vector3::UnitY()) *
                       Eigen::AngleAxisd(rpy.z(), Vector3::UnitZ());
  return canonical(q);
}

Vector3 rotation_vector(const Quaternion& q) {
  const Quaternion c = canonical(q);
  const Vector3 v = c.vec();
  const double n = v.norm();
  if (n < 1e-12) return 2.0 * v;
  const double angle = 2.0 * std::atan2(n, c.w());
  return v * (angle / n);
}

Quaternion from_rotation_vector(const Vector3& v) {
  const double angle = v.norm();
  if (angle < 1e-12) return canonical(Quaternion(1.0, 0.5 * v.x(), 0.5 * v.y(), 0.5 * v.z()));
  return canonical(Quaternion(Eigen::AngleAxisd(angle, v / angle)));
}

Twist pose_error(const Pose& target, const Pose& current) {
  Twist e;
  e.head<3>() = target.position - current.position;
  e.tail<3>() = rotation_vector(target.orientation * current.orientation.conjugate());
  return e;
}

bool is_unit(const Quaternion& q, double tol) { return std::abs(q.norm() - 1.0) <= tol; }

Pose Pose::from_xyz_rpy(const Vector3& xyz, const Vector3& rpy) { return {xyz, quaternion_from_rpy(rpy)}; }

Eigen::Isometry3d Pose::isometry() const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = orientation.normalized().toRotationMatrix();
  t.translation() = position;
  return t;
}

Pose Pose::from_isometry(const Eigen::Isometry3d& t) {
  return {t.translation(), canonical(Quaternion(t.rotation()))};
}

Pose Pose::inverse() const {
  const Quaternion inv = orientation.conjugate();
  return {-(inv * position), canonical(inv)};
}

Pose Pose::compose(const Pose& rhs) const {
  return {position + orientation * rhs.position, canonical(orientation * rhs.orientation)};
}

}  // namespace demoforge::kinematics
