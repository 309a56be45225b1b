#include "demoforge/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "demoforge/kinematics/kinematics.hpp"

namespace demoforge::sim {

using kinematics::canonical;

const char* to_string(Gripper g) { return g == Gripper::open ? "open" : "closed"; }

double sim_time_of(std::int64_t tick) {
  return static_cast<double>(tick) * static_cast<double>(kTickDt.num) / static_cast<double>(kTickDt.den);
}

bool SimFrame::operator==(const SimFrame& rhs) const {
  return tick == rhs.tick && sim_time == rhs.sim_time && seq == rhs.seq &&
         joint_config.size() == rhs.joint_config.size() && joint_config == rhs.joint_config &&
         ee_pose == rhs.ee_pose && gripper == rhs.gripper && grasped_object == rhs.grasped_object &&
         object_poses == rhs.object_poses;
}

kinematics::IkParams tracking_params(const Scene& scene) {
  kinematics::IkParams p;
  p.orientation_weight = scene.spec.orientation_weight;
  return p;
}

WorldState load_scene(const ScenePtr& scene) {
  WorldState s;
  s.scene = scene;
  s.joint_config = scene->spec.robot_initial;
  s.ee_target = kinematics::forward_kinematics(scene->robot, s.joint_config).ee_pose;
  for (const auto& o : scene->spec.objects) s.object_poses.emplace(o.id, o.initial_pose);
  return s;
}

WorldState apply_teleop(WorldState state, const TeleopPayload& cmd) {
  const Aabb& bounds = state.scene->spec.workspace;
  if (const auto* d = std::get_if<EeDelta>(&cmd)) {
    state.ee_target.position = bounds.clamp(state.ee_target.position + Vector3(d->dx, d->dy, d->dz));
    if (d->droll != 0.0 || d->dpitch != 0.0 || d->dyaw != 0.0) {
      const auto rot = kinematics::quaternion_from_rpy({d->droll, d->dpitch, d->dyaw});
      state.ee_target.orientation = canonical(rot * state.ee_target.orientation);
    }
  } else if (const auto* p = std::get_if<PoseTarget>(&cmd)) {
    state.ee_target.position = bounds.clamp(p->pose.position);
    state.ee_target.orientation = canonical(p->pose.orientation);
  } else if (const auto* g = std::get_if<GripperAction>(&cmd)) {
    state.gripper_command = g->desired;
  }
  return state;
}

WorldState apply_action(WorldState state, const Action& action) {
  if (std::holds_alternative<ResetAction>(action)) return reset(state, state.scene);
  return std::visit(
      [&](const auto& v) -> WorldState {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, ResetAction>) {
          return state;
        } else {
          return apply_teleop(std::move(state), TeleopPayload{v});
        }
      },
      action);
}

namespace {

// One resolved-rate increment: DLS toward the target with the Cartesian error
// capped, then per-joint velocity and position limits. Inside the IK
// tolerance the arm holds still, which makes a reached target a fixed point.
JointConfig track(const Scene& scene, const JointConfig& q, const Pose& target, double dt) {
  const auto params = tracking_params(scene);
  const RobotModel& robot = scene.robot;
  const Pose ee = kinematics::forward_kinematics(robot, q).ee_pose;
  kinematics::Twist e = kinematics::pose_error(target, ee);
  e.tail<3>() *= params.orientation_weight;
  if (e.head<3>().norm() <= params.pos_tol && e.tail<3>().norm() <= params.rot_tol) return q;

  JointConfig dq = kinematics::dls_increment(robot, q, target, params, &kTrackingCaps);
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    const double cap = robot.joints[i].max_velocity * dt;
    const auto k = static_cast<Eigen::Index>(i);
    dq[k] = std::clamp(dq[k], -cap, cap);
  }
  return kinematics::clamp_to_limits(robot, q + dq);
}

std::optional<std::string> nearest_graspable(const WorldState& s, const Vector3& ee) {
  std::optional<std::string> best;
  double best_dist = std::numeric_limits<double>::infinity();
  // object_poses iterates in ascending id order, so a strict comparison keeps
  // the lexicographically smallest id among equidistant candidates.
  for (const auto& o : s.scene->spec.objects) {
    if (!o.graspable) continue;
    const double d = (s.object_poses.at(o.id).position - ee).norm();
    if (d <= kGraspRadius && d < best_dist) {
      best = o.id;
      best_dist = d;
    }
  }
  return best;
}

}  // namespace

std::pair<WorldState, SimFrame> step(WorldState state, Rational dt) {
  if (!(dt == kTickDt)) {
    throw StepError("step dt " + std::to_string(dt.num) + "/" + std::to_string(dt.den) +
                    " differs from the fixed timestep 1/60");
  }
  const Scene& scene = *state.scene;
  state.joint_config = track(scene, state.joint_config, state.ee_target, dt.seconds());
  const Pose ee = kinematics::forward_kinematics(scene.robot, state.joint_config).ee_pose;

  if (state.gripper_command != state.gripper) {
    if (state.gripper_command == Gripper::closed) {
      state.grasped_object = nearest_graspable(state, ee.position);
      if (state.grasped_object) {
        state.grasp_offset = ee.inverse().compose(state.object_poses.at(*state.grasped_object));
      }
    } else {
      // Released objects stay where they are.
      state.grasped_object.reset();
      state.grasp_offset = Pose::identity();
    }
    state.gripper = state.gripper_command;
  }
  if (state.grasped_object) state.object_poses[*state.grasped_object] = ee.compose(state.grasp_offset);

  ++state.tick;
  ++state.seq;
  SimFrame frame = snapshot(state, state.seq);
  return {std::move(state), std::move(frame)};
}

WorldState reset(const WorldState& state, const ScenePtr& scene) {
  WorldState fresh = load_scene(scene);
  fresh.tick = state.tick;
  fresh.seq = state.seq;
  return fresh;
}

SimFrame snapshot(const WorldState& state, std::uint64_t seq) {
  SimFrame f;
  f.tick = state.tick;
  f.sim_time = state.sim_time();
  f.seq = seq;
  f.joint_config = state.joint_config;
  f.ee_pose = kinematics::forward_kinematics(state.scene->robot, state.joint_config).ee_pose;
  f.gripper = state.gripper;
  f.grasped_object = state.grasped_object;
  f.object_poses = state.object_poses;
  return f;
}

}  // namespace demoforge::sim
