#include "demoforge/kinematics/ik.hpp"

#include <cmath>

namespace demoforge::kinematics {

namespace {

using Matrix6 = Eigen::Matrix<double, 6, 6>;

// Error clamping per iteration. A full step on a large error overshoots into
// the joint limits and can park a planar arm in its folded singularity; near
// the goal the error is below the caps and the update is the plain DLS one.
constexpr ErrorCaps kSolveCaps{0.2, 0.5};

Twist weights(const IkParams& params) {
  Twist w;
  w << 1.0, 1.0, 1.0, params.orientation_weight, params.orientation_weight, params.orientation_weight;
  return w;
}

Twist weighted_error(const RobotModel& model, const JointConfig& q, const Pose& target, const Twist& w) {
  return w.cwiseProduct(pose_error(target, forward_kinematics(model, q).ee_pose));
}

bool within_tolerance(const Twist& e, const IkParams& params) {
  return e.head<3>().norm() <= params.pos_tol && e.tail<3>().norm() <= params.rot_tol;
}

JointConfig increment_for(const RobotModel& model, const JointConfig& q, const Twist& w, Twist e,
                          const IkParams& params, const ErrorCaps* caps) {
  if (caps != nullptr) {
    const double lin = e.head<3>().norm();
    if (lin > caps->linear) e.head<3>() *= caps->linear / lin;
    const double ang = e.tail<3>().norm();
    if (ang > caps->angular) e.tail<3>() *= caps->angular / ang;
  }
  const Jacobian jw = w.asDiagonal() * jacobian(model, q);
  const double lambda_sq = params.damping * params.damping;
  const Matrix6 a = jw * jw.transpose() + lambda_sq * Matrix6::Identity();
  // A is symmetric positive definite for lambda > 0.
  const Twist y = a.ldlt().solve(e);
  return params.step_scale * (jw.transpose() * y);
}

void require_finite(const Pose& target, const JointConfig& seed) {
  if (!target.position.allFinite() || !target.orientation.coeffs().allFinite() || !seed.allFinite()) {
    throw KinematicsError(KinematicsError::Kind::non_finite, "IK target or seed contains non-finite values");
  }
}

}  // namespace

void IkParams::validate() const {
  auto bad = [](const char* what) {
    throw KinematicsError(KinematicsError::Kind::invalid_params, std::string("invalid IK parameter: ") + what);
  };
  if (!(damping > 0.0)) bad("damping must be > 0");
  if (max_iterations <= 0) bad("max_iterations must be > 0");
  if (!(pos_tol > 0.0)) bad("pos_tol must be > 0");
  if (!(rot_tol > 0.0)) bad("rot_tol must be > 0");
  if (!(step_scale > 0.0 && step_scale <= 1.0)) bad("step_scale must be in (0, 1]");
  if (!(orientation_weight >= 0.0) || !std::isfinite(orientation_weight)) bad("orientation_weight must be >= 0");
}

JointConfig dls_increment(const RobotModel& model, const JointConfig& q, const Pose& target, const IkParams& params,
                          const ErrorCaps* caps) {
  require_length(model, q);
  const Twist w = weights(params);
  return increment_for(model, q, w, weighted_error(model, q, target, w), params, caps);
}

IkResult solve_ik_dls(const RobotModel& model, const Pose& target, const JointConfig& seed, const IkParams& params) {
  require_length(model, seed);
  require_finite(target, seed);
  params.validate();

  const Pose goal{target.position, canonical(target.orientation)};
  const Twist w = weights(params);

  IkResult best;
  best.solution = seed;
  best.residual = weighted_error(model, seed, goal, w);

  JointConfig q = seed;
  Twist e = best.residual;
  int iterations = 0;
  while (!within_tolerance(e, params) && iterations < params.max_iterations) {
    q = clamp_to_limits(model, q + increment_for(model, q, w, e, params, &kSolveCaps));
    e = weighted_error(model, q, goal, w);
    ++iterations;
    if (e.norm() < best.residual.norm()) {
      best.solution = q;
      best.residual = e;
    }
  }
  if (within_tolerance(e, params)) {
    best.solution = q;
    best.residual = e;
    best.converged = true;
  }
  best.iterations = iterations;
  return best;
}

}  // namespace demoforge::kinematics
