#pragma once

#include "demoforge/kinematics/kinematics.hpp"

namespace demoforge::kinematics {

struct IkParams {
  double damping = 0.05;        // lambda
  int max_iterations = 100;
  double pos_tol = 1e-4;        // m
  double rot_tol = 1e-3;        // rad
  double step_scale = 1.0;      // (0, 1]
  /// Scales the orientation rows of both the error and the Jacobian. 0 turns
  /// the solve into a position-only one.
  double orientation_weight = 1.0;

  void validate() const;
};

struct IkResult {
  JointConfig solution;
  bool converged = false;
  int iterations = 0;
  /// Weighted error at `solution`: position (m) then rotation vector (rad).
  Twist residual = Twist::Zero();

  double position_residual() const { return residual.head<3>().norm(); }
  double orientation_residual() const { return residual.tail<3>().norm(); }
};

/// Iterates q <- clamp(q + step_scale * J^T (J J^T + lambda^2 I)^-1 e) until
/// both tolerances hold or max_iterations is reached. On failure the iterate
/// with the smallest residual norm is returned.
IkResult solve_ik_dls(const RobotModel& model, const Pose& target, const JointConfig& seed,
                      const IkParams& params = {});

/// Caps on the Cartesian error fed to a single increment.
struct ErrorCaps {
  double linear = 0.02;   // m
  double angular = 0.1;   // rad
};

/// One unclamped damped-least-squares increment toward `target`, with the
/// twist error optionally truncated to `caps` first. Building block for both
/// the iterative solver and resolved-rate tracking.
JointConfig dls_increment(const RobotModel& model, const JointConfig& q, const Pose& target, const IkParams& params,
                          const ErrorCaps* caps = nullptr);

}  // namespace demoforge::kinematics
