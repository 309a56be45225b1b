#include "demoforge/wire/json_io.hpp"

#include <cmath>

namespace demoforge::wire {

using kinematics::Pose;
using kinematics::Quaternion;
using kinematics::Vector3;

Json pose_to_json(const Pose& pose) {
  const auto& p = pose.position;
  const auto& q = pose.orientation;
  return Json::array({p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z()});
}

Pose pose_from_json(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 7) {
    throw WireError(WireError::Kind::schema_violation, context + ": pose must be an array of 7 numbers");
  }
  double v[7];
  for (std::size_t i = 0; i < 7; ++i) v[i] = finite_number(j[i], context);
  return {Vector3(v[0], v[1], v[2]), Quaternion(v[3], v[4], v[5], v[6])};
}

Json joints_to_json(const kinematics::JointConfig& q) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < q.size(); ++i) out.push_back(q[i]);
  return out;
}

kinematics::JointConfig joints_from_json(const Json& j, const std::string& context) {
  if (!j.is_array()) throw WireError(WireError::Kind::schema_violation, context + ": expected an array");
  kinematics::JointConfig q(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) q[static_cast<Eigen::Index>(i)] = finite_number(j[i], context);
  return q;
}

namespace {

Json objects_to_json(const std::map<std::string, Pose>& objects) {
  Json out = Json::object();
  for (const auto& [id, pose] : objects) out[id] = pose_to_json(pose);
  return out;
}

std::map<std::string, Pose> objects_from_json(const Json& j, const std::string& context) {
  std::map<std::string, Pose> out;
  for (const auto& [id, pose] : j.items()) out.emplace(id, pose_from_json(pose, context + "." + id));
  return out;
}

Json nullable(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

sim::Gripper gripper_from(const std::string& s, const FieldReader& r) {
  if (s == "open") return sim::Gripper::open;
  if (s == "closed") return sim::Gripper::closed;
  r.fail("gripper must be 'open' or 'closed'");
}

Vector3 vec3_from(FieldReader& r, std::string_view key) {
  const auto v = r.numbers(key, 3);
  return {v[0], v[1], v[2]};
}

Json vec3_json(const Vector3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json box_json(const sim::Aabb& b) { return Json{{"max", vec3_json(b.max)}, {"min", vec3_json(b.min)}}; }

sim::Aabb box_from(const Json& j, const std::string& context) {
  FieldReader r(j, context);
  sim::Aabb b{vec3_from(r, "min"), vec3_from(r, "max")};
  r.finish();
  return b;
}

void check_delta(FieldReader& r, const char* key, double value, double limit) {
  if (std::abs(value) > limit) {
    r.out_of_range(std::string("'") + key + "'=" + std::to_string(value) + " exceeds per-message limit " +
                   std::to_string(limit));
  }
}

}  // namespace

Json frame_to_json(const sim::SimFrame& f) {
  return Json{{"ee", pose_to_json(f.ee_pose)},
              {"grasped", nullable(f.grasped_object)},
              {"gripper", sim::to_string(f.gripper)},
              {"objects", objects_to_json(f.object_poses)},
              {"q", joints_to_json(f.joint_config)},
              {"seq", f.seq},
              {"t", "state"},
              {"tick", f.tick},
              {"time", f.sim_time}};
}

sim::SimFrame frame_from_json(const Json& j) {
  FieldReader r(j, "state");
  if (r.string("t") != "state") r.fail("not a state record");
  sim::SimFrame f;
  f.ee_pose = pose_from_json(r.raw("ee"), "state.ee");
  f.grasped_object = r.nullable_string("grasped");
  f.gripper = gripper_from(r.string("gripper"), r);
  f.object_poses = objects_from_json(r.object("objects"), "state.objects");
  f.joint_config = joints_from_json(r.array("q"), "state.q");
  f.seq = static_cast<std::uint64_t>(r.integer("seq"));
  f.tick = r.integer("tick");
  f.sim_time = r.number("time");
  r.finish();
  return f;
}

Json world_state_to_json(const sim::WorldState& s) {
  return Json{{"ee_target", pose_to_json(s.ee_target)},
              {"grasp_offset", pose_to_json(s.grasp_offset)},
              {"grasped", nullable(s.grasped_object)},
              {"gripper", sim::to_string(s.gripper)},
              {"gripper_command", sim::to_string(s.gripper_command)},
              {"objects", objects_to_json(s.object_poses)},
              {"q", joints_to_json(s.joint_config)},
              {"seq", s.seq},
              {"tick", s.tick}};
}

sim::WorldState world_state_from_json(const Json& j, const sim::ScenePtr& scene) {
  FieldReader r(j, "world_state");
  sim::WorldState s;
  s.scene = scene;
  s.ee_target = pose_from_json(r.raw("ee_target"), "world_state.ee_target");
  s.grasp_offset = pose_from_json(r.raw("grasp_offset"), "world_state.grasp_offset");
  s.grasped_object = r.nullable_string("grasped");
  s.gripper = gripper_from(r.string("gripper"), r);
  s.gripper_command = gripper_from(r.string("gripper_command"), r);
  s.object_poses = objects_from_json(r.object("objects"), "world_state.objects");
  s.joint_config = joints_from_json(r.array("q"), "world_state.q");
  s.seq = static_cast<std::uint64_t>(r.integer("seq"));
  s.tick = r.integer("tick");
  r.finish();
  if (static_cast<std::size_t>(s.joint_config.size()) != scene->robot.dof()) {
    r.fail("joint count does not match the scene's robot");
  }
  for (const auto& o : scene->spec.objects) {
    if (!s.object_poses.contains(o.id)) r.fail("missing object '" + o.id + "'");
  }
  if (s.object_poses.size() != scene->spec.objects.size()) r.fail("unknown object in state");
  return s;
}

void teleop_payload_fields(const sim::TeleopPayload& payload, Json& out) {
  if (const auto* d = std::get_if<sim::EeDelta>(&payload)) {
    out["t"] = "ee_delta";
    out["dx"] = d->dx;
    out["dy"] = d->dy;
    out["dz"] = d->dz;
    out["droll"] = d->droll;
    out["dpitch"] = d->dpitch;
    out["dyaw"] = d->dyaw;
  } else if (const auto* p = std::get_if<sim::PoseTarget>(&payload)) {
    out["t"] = "pose_target";
    out["pose"] = pose_to_json(p->pose);
  } else if (const auto* g = std::get_if<sim::GripperAction>(&payload)) {
    out["t"] = "gripper";
    out["action"] = g->desired == sim::Gripper::closed ? "close" : "open";
  }
}

sim::TeleopPayload teleop_payload_from_reader(const std::string& tag, FieldReader& r) {
  if (tag == "ee_delta") {
    sim::EeDelta d;
    d.dx = r.number("dx");
    d.dy = r.number("dy");
    d.dz = r.number("dz");
    d.droll = r.number("droll");
    d.dpitch = r.number("dpitch");
    d.dyaw = r.number("dyaw");
    check_delta(r, "dx", d.dx, kMaxDeltaLinear);
    check_delta(r, "dy", d.dy, kMaxDeltaLinear);
    check_delta(r, "dz", d.dz, kMaxDeltaLinear);
    check_delta(r, "droll", d.droll, kMaxDeltaAngular);
    check_delta(r, "dpitch", d.dpitch, kMaxDeltaAngular);
    check_delta(r, "dyaw", d.dyaw, kMaxDeltaAngular);
    return d;
  }
  if (tag == "pose_target") {
    sim::PoseTarget p;
    p.pose = pose_from_json(r.raw("pose"), r.context() + ".pose");
    if (std::abs(p.pose.orientation.norm() - 1.0) > 1e-6) r.out_of_range("pose quaternion must have unit norm");
    return p;
  }
  if (tag == "gripper") {
    const std::string action = r.string("action");
    if (action == "open") return sim::GripperAction{sim::Gripper::open};
    if (action == "close") return sim::GripperAction{sim::Gripper::closed};
    r.fail("gripper action must be 'open' or 'close'");
  }
  throw WireError(WireError::Kind::unknown_type, "unknown teleop payload '" + tag + "'");
}

Json action_to_json(const sim::Action& action) {
  Json out = Json::object();
  if (std::holds_alternative<sim::ResetAction>(action)) {
    out["t"] = "reset";
    return out;
  }
  std::visit(
      [&](const auto& v) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(v)>, sim::ResetAction>) {
          teleop_payload_fields(sim::TeleopPayload{v}, out);
        }
      },
      action);
  return out;
}

sim::Action action_from_json(const Json& j) {
  FieldReader r(j, "action");
  const std::string tag = r.string("t");
  if (tag == "reset") {
    r.finish();
    return sim::ResetAction{};
  }
  sim::Action out = sim::to_action(teleop_payload_from_reader(tag, r));
  r.finish();
  return out;
}

Json robot_to_json(const kinematics::RobotModel& m) {
  Json joints = Json::array();
  for (const auto& j : m.joints) {
    joints.push_back(Json{{"axis", vec3_json(j.axis)},
                          {"kind", kinematics::to_string(j.kind)},
                          {"limit", Json::array({j.limit_lo, j.limit_hi})},
                          {"max_velocity", j.max_velocity},
                          {"name", j.name},
                          {"origin", pose_to_json(j.origin)}});
  }
  return Json{{"base_pose", pose_to_json(m.base_pose)},
              {"ee_offset", pose_to_json(m.ee_offset)},
              {"joints", joints},
              {"name", m.name}};
}

kinematics::RobotModel robot_from_json(const Json& j) {
  FieldReader r(j, "robot");
  kinematics::RobotModel m;
  m.base_pose = pose_from_json(r.raw("base_pose"), "robot.base_pose");
  m.ee_offset = pose_from_json(r.raw("ee_offset"), "robot.ee_offset");
  for (const auto& jj : r.array("joints")) {
    FieldReader jr(jj, "robot.joint");
    kinematics::JointSpec spec;
    spec.axis = vec3_from(jr, "axis");
    const std::string kind = jr.string("kind");
    if (kind == "revolute") {
      spec.kind = kinematics::JointKind::revolute;
    } else if (kind == "prismatic") {
      spec.kind = kinematics::JointKind::prismatic;
    } else {
      jr.fail("unknown joint kind");
    }
    const auto limit = jr.numbers("limit", 2);
    spec.limit_lo = limit[0];
    spec.limit_hi = limit[1];
    spec.max_velocity = jr.number("max_velocity");
    spec.name = jr.string("name");
    spec.origin = pose_from_json(jr.raw("origin"), "robot.joint.origin");
    jr.finish();
    m.joints.push_back(std::move(spec));
  }
  m.name = r.string("name");
  r.finish();
  return m;
}

Json scene_to_json(const sim::SceneSpec& s) {
  Json objects = Json::array();
  for (const auto& o : s.objects) {
    objects.push_back(Json{{"dimensions", vec3_json(o.dimensions)},
                           {"graspable", o.graspable},
                           {"id", o.id},
                           {"pose", pose_to_json(o.initial_pose)},
                           {"shape", sim::to_string(o.shape)}});
  }
  return Json{{"goal", s.goal_region ? box_json(*s.goal_region) : Json(nullptr)},
              {"name", s.name},
              {"objects", objects},
              {"orientation_weight", s.orientation_weight},
              {"robot", s.robot},
              {"robot_initial", joints_to_json(s.robot_initial)},
              {"task_prompt", nullable(s.task_prompt)},
              {"workspace", box_json(s.workspace)}};
}

sim::SceneSpec scene_from_json(const Json& j) {
  FieldReader r(j, "scene");
  sim::SceneSpec s;
  const Json& goal = r.raw("goal");
  if (!goal.is_null()) s.goal_region = box_from(goal, "scene.goal");
  s.name = r.string("name");
  for (const auto& oj : r.array("objects")) {
    FieldReader o(oj, "scene.object");
    sim::ObjectSpec spec;
    spec.dimensions = vec3_from(o, "dimensions");
    spec.graspable = o.boolean("graspable");
    spec.id = o.string("id");
    spec.initial_pose = pose_from_json(o.raw("pose"), "scene.object.pose");
    const std::string shape = o.string("shape");
    if (shape == "box") {
      spec.shape = sim::Shape::box;
    } else if (shape == "sphere") {
      spec.shape = sim::Shape::sphere;
    } else {
      o.fail("unknown shape");
    }
    o.finish();
    s.objects.push_back(std::move(spec));
  }
  s.orientation_weight = r.number("orientation_weight");
  s.robot = r.string("robot");
  s.robot_initial = joints_from_json(r.array("robot_initial"), "scene.robot_initial");
  s.task_prompt = r.nullable_string("task_prompt");
  s.workspace = box_from(r.object("workspace"), "scene.workspace");
  r.finish();
  return s;
}

}  // namespace demoforge::wire
