#pragma once

// Canonical-object mappings for domain types shared by the wire codec and the
// episode store. Readers are strict (FieldReader semantics).

#include "demoforge/kinematics/robot_model.hpp"
#include "demoforge/sim/command.hpp"
#include "demoforge/sim/scene.hpp"
#include "demoforge/sim/world.hpp"
#include "demoforge/wire/canonical.hpp"

namespace demoforge::wire {

/// [x, y, z, qw, qx, qy, qz]
Json pose_to_json(const kinematics::Pose& pose);
kinematics::Pose pose_from_json(const Json& j, const std::string& context);

Json joints_to_json(const kinematics::JointConfig& q);
kinematics::JointConfig joints_from_json(const Json& j, const std::string& context);

/// Frame fields plus "t":"state"; this is both the StateFrame wire message
/// and the frames.log record.
Json frame_to_json(const sim::SimFrame& frame);
sim::SimFrame frame_from_json(const Json& j);

/// Dynamic part of a WorldState (everything except the scene).
Json world_state_to_json(const sim::WorldState& state);
sim::WorldState world_state_from_json(const Json& j, const sim::ScenePtr& scene);

/// Action payloads carry their own "t" tag (ee_delta, pose_target, gripper,
/// reset) but no client_seq.
Json action_to_json(const sim::Action& action);
sim::Action action_from_json(const Json& j);
/// Reads the payload fields of an already-opened reader (tag consumed by the
/// caller). Enforces per-message delta bounds.
sim::TeleopPayload teleop_payload_from_reader(const std::string& tag, FieldReader& r);
void teleop_payload_fields(const sim::TeleopPayload& payload, Json& out);

Json robot_to_json(const kinematics::RobotModel& model);
kinematics::RobotModel robot_from_json(const Json& j);

Json scene_to_json(const sim::SceneSpec& spec);
sim::SceneSpec scene_from_json(const Json& j);

inline constexpr double kMaxDeltaLinear = 0.1;   // m per message per axis
inline constexpr double kMaxDeltaAngular = 0.5;  // rad per message per axis

}  // namespace demoforge::wire
