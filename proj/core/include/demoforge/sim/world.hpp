#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "demoforge/kinematics/ik.hpp"
#include "demoforge/sim/command.hpp"
#include "demoforge/sim/scene.hpp"

namespace demoforge::sim {

/// Exact timestep as a rational number of seconds.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 60;

  double seconds() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

inline constexpr Rational kTickDt{1, 60};
inline constexpr double kGraspRadius = 0.05;        // m
inline constexpr kinematics::ErrorCaps kTrackingCaps{0.02, 0.1};

/// tick * dt, computed as tick / 60 so it never accumulates drift.
double sim_time_of(std::int64_t tick);

struct WorldState {
  ScenePtr scene;
  std::int64_t tick = 0;
  /// Sequence number of the last frame this world produced.
  std::uint64_t seq = 0;
  JointConfig joint_config;
  Pose ee_target;
  Gripper gripper = Gripper::open;
  /// Desired gripper state set by teleop; resolved by the next step.
  Gripper gripper_command = Gripper::open;
  std::optional<std::string> grasped_object;
  /// ee^-1 * object, captured at grasp time.
  Pose grasp_offset;
  std::map<std::string, Pose> object_poses;

  double sim_time() const { return sim_time_of(tick); }
};

struct SimFrame {
  std::int64_t tick = 0;
  double sim_time = 0.0;
  std::uint64_t seq = 0;
  JointConfig joint_config;
  Pose ee_pose;
  Gripper gripper = Gripper::open;
  std::optional<std::string> grasped_object;
  std::map<std::string, Pose> object_poses;

  bool operator==(const SimFrame& rhs) const;
};

/// World at tick 0: robot at its initial configuration, ee_target on the
/// current end-effector pose, gripper open, objects at their initial poses.
WorldState load_scene(const ScenePtr& scene);

/// Moves or replaces the end-effector target (clamped to the workspace) or
/// sets the desired gripper state. Joints do not move until the next step.
WorldState apply_teleop(WorldState state, const TeleopPayload& cmd);

/// apply_teleop, plus reset.
WorldState apply_action(WorldState state, const Action& action);

class StepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Advances one tick: one velocity-bounded IK increment toward ee_target,
/// gripper/grasp resolution, grasped-object attachment, then tick + 1.
/// Throws StepError if dt differs from the fixed timestep.
std::pair<WorldState, SimFrame> step(WorldState state, Rational dt);

/// Restores the scene's initial physical state. The tick and seq counters are
/// kept so that a session's timeline stays monotone across resets.
WorldState reset(const WorldState& state, const ScenePtr& scene);

/// Frame view of `state` stamped with `seq`.
SimFrame snapshot(const WorldState& state, std::uint64_t seq);

/// Tracking parameters used by step() for `scene`.
kinematics::IkParams tracking_params(const Scene& scene);

}  // namespace demoforge::sim
