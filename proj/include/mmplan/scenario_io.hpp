#pragma once

// Scenario files: JSON with a required schema_version field.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmplan/scenario.hpp"

namespace mmplan {

inline constexpr int kScenarioSchemaVersion = 1;

class ScenarioFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace io {

using nlohmann::json;

inline json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ScenarioFormatError("expected a 3-vector, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json pose(const Pose3& p) {
  const Quat& q = p.orientation();
  return {{"position", vec(p.position())}, {"orientation", json::array({q.w(), q.x(), q.y(), q.z()})}};
}

inline Pose3 pose3(const json& j) {
  const json& q = j.at("orientation");
  if (!q.is_array() || q.size() != 4) throw ScenarioFormatError("orientation must be [w, x, y, z]");
  return Pose3(vec3(j.at("position")),
               Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()));
}

inline json base(const BasePose& b) { return json::array({b.x(), b.y(), b.yaw()}); }

inline BasePose base_pose(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ScenarioFormatError("base pose must be [x, y, yaw]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json joints(const JointVector& q) {
  json a = json::array();
  for (Eigen::Index i = 0; i < q.size(); ++i) a.push_back(q[i]);
  return a;
}

inline JointVector joint_vector(const json& j) {
  JointVector q(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) q[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return q;
}

inline json state(const WholeBodyState& s) {
  return {{"base", base(s.base)}, {"joints", joints(s.joints)}, {"gripper", s.gripper}};
}

inline WholeBodyState whole_body_state(const json& j) {
  return {base_pose(j.at("base")), joint_vector(j.at("joints")), j.at("gripper").get<double>()};
}

inline json box(const AxisBox& b) { return {{"min", vec(b.min)}, {"max", vec(b.max)}}; }
inline AxisBox axis_box(const json& j) { return {vec3(j.at("min")), vec3(j.at("max"))}; }

inline json obstacle(const Obstacle& o) {
  json j;
  if (const auto* s = std::get_if<Sphere>(&o.shape)) {
    j = {{"type", "sphere"}, {"center", vec(s->center)}, {"radius", s->radius}};
  } else if (const auto* b = std::get_if<AxisBox>(&o.shape)) {
    j = {{"type", "box"}, {"min", vec(b->min)}, {"max", vec(b->max)}};
  } else {
    const auto& c = std::get<Cylinder>(o.shape);
    j = {{"type", "cylinder"}, {"base_center", vec(c.base_center)}, {"radius", c.radius},
         {"height", c.height}};
  }
  j["is_target"] = o.is_target;
  return j;
}

inline Obstacle obstacle_from(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  Obstacle o;
  if (type == "sphere") {
    o.shape = Sphere{vec3(j.at("center")), j.at("radius").get<double>()};
  } else if (type == "box") {
    o.shape = axis_box(j);
  } else if (type == "cylinder") {
    o.shape = Cylinder{vec3(j.at("base_center")), j.at("radius").get<double>(),
                       j.at("height").get<double>()};
  } else {
    throw ScenarioFormatError("unknown obstacle type '" + type + "'");
  }
  o.is_target = j.value("is_target", false);
  return o;
}

inline json chain(const KinematicChain& c) {
  json links = json::array();
  for (const Link& l : c.links()) {
    links.push_back({{"offset", pose(l.offset)}, {"axis", vec(l.axis)}, {"lower", l.lower},
                     {"upper", l.upper}});
  }
  return {{"base_mount", pose(c.base_mount())}, {"links", links}};
}

inline KinematicChain chain_from(const json& j) {
  std::vector<Link> links;
  for (const json& l : j.at("links")) {
    links.push_back({pose3(l.at("offset")), vec3(l.at("axis")), l.at("lower").get<double>(),
                     l.at("upper").get<double>()});
  }
  return KinematicChain(std::move(links), pose3(j.at("base_mount")));
}

inline json weights(const CostWeights& w) {
  return {{"lambda_r", w.lambda_r}, {"lambda_s", w.lambda_s},     {"lambda_c", w.lambda_c},
          {"epsilon0", w.epsilon0}, {"c0", w.c0},                 {"n_max", w.n_max},
          {"alpha", w.alpha},       {"k_top", w.k_top},           {"n_candidates", w.n_candidates},
          {"sigma_pos", w.sigma_pos}, {"sigma_rot", w.sigma_rot}, {"yaw_weight", w.yaw_weight}};
}

inline CostWeights weights_from(const json& j) {
  CostWeights w;
  w.lambda_r = j.value("lambda_r", w.lambda_r);
  w.lambda_s = j.value("lambda_s", w.lambda_s);
  w.lambda_c = j.value("lambda_c", w.lambda_c);
  w.epsilon0 = j.value("epsilon0", w.epsilon0);
  w.c0 = j.value("c0", w.c0);
  w.n_max = j.value("n_max", w.n_max);
  w.alpha = j.value("alpha", w.alpha);
  w.k_top = j.value("k_top", w.k_top);
  w.n_candidates = j.value("n_candidates", w.n_candidates);
  w.sigma_pos = j.value("sigma_pos", w.sigma_pos);
  w.sigma_rot = j.value("sigma_rot", w.sigma_rot);
  w.yaw_weight = j.value("yaw_weight", w.yaw_weight);
  w.validate();
  return w;
}

inline json trajectory(const Trajectory& t) {
  json states = json::array();
  json targets = json::array();
  for (const auto& s : t.states) states.push_back(state(s));
  for (const auto& p : t.ee_targets) targets.push_back(pose(p));
  return {{"states", states}, {"ee_targets", targets}};
}

inline Trajectory trajectory_from(const json& j) {
  Trajectory t;
  for (const json& s : j.at("states")) t.states.push_back(whole_body_state(s));
  for (const json& p : j.at("ee_targets")) t.ee_targets.push_back(pose3(p));
  t.validate();
  return t;
}

}  // namespace io

inline nlohmann::json scenario_to_json(const Scenario& s) {
  using nlohmann::json;
  json obstacles = json::array();
  for (const Obstacle& o : s.scene.obstacles) obstacles.push_back(io::obstacle(o));
  json waypoints = json::array();
  for (const WaypointPair& w : s.waypoints) {
    waypoints.push_back({{"q_current", io::pose(w.q_current)},
                         {"base_at_prediction", io::base(w.base_at_prediction)},
                         {"q_next", io::pose(w.q_next)},
                         {"gripper_next", w.gripper_next}});
  }
  json cert = json::array();
  for (const Trajectory& t : s.certificate) cert.push_back(io::trajectory(t));
  return {{"schema_version", kScenarioSchemaVersion},
          {"name", s.name},
          {"family", to_string(s.family)},
          {"seeds", {{"rng", s.rng_seed}, {"query_points", s.query_seed}}},
          {"scene", {{"workspace", io::box(s.scene.workspace)}, {"obstacles", obstacles}}},
          {"chain", io::chain(s.chain)},
          {"base_geometry", io::box(s.base_geometry)},
          {"start_state", io::state(s.start_state)},
          {"waypoints", waypoints},
          {"certificate", cert},
          {"n_q", s.n_q},
          {"field_resolution", s.field_resolution},
          {"weights", io::weights(s.weights)}};
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.contains("schema_version")) throw ScenarioFormatError("scenario: missing schema_version");
  const int version = j.at("schema_version").get<int>();
  if (version != kScenarioSchemaVersion) {
    throw ScenarioFormatError("scenario: unsupported schema_version " + std::to_string(version));
  }
  try {
    Scenario s;
    s.name = j.at("name").get<std::string>();
    s.family = family_from_string(j.at("family").get<std::string>());
    s.rng_seed = j.at("seeds").at("rng").get<std::uint64_t>();
    s.query_seed = j.at("seeds").at("query_points").get<std::uint64_t>();
    s.scene.workspace = io::axis_box(j.at("scene").at("workspace"));
    for (const auto& o : j.at("scene").at("obstacles")) s.scene.obstacles.push_back(io::obstacle_from(o));
    s.scene.validate();
    s.chain = io::chain_from(j.at("chain"));
    s.base_geometry = io::axis_box(j.at("base_geometry"));
    s.start_state = io::whole_body_state(j.at("start_state"));
    detail::require_length(s.chain, s.start_state.joints);
    for (const auto& w : j.at("waypoints")) {
      s.waypoints.push_back({io::pose3(w.at("q_current")), io::base_pose(w.at("base_at_prediction")),
                             io::pose3(w.at("q_next")), w.at("gripper_next").get<double>()});
    }
    if (s.waypoints.empty()) throw ScenarioFormatError("scenario: no waypoints");
    for (const auto& t : j.value("certificate", nlohmann::json::array())) {
      s.certificate.push_back(io::trajectory_from(t));
    }
    s.n_q = j.at("n_q").get<std::size_t>();
    s.field_resolution = j.at("field_resolution").get<double>();
    s.weights = io::weights_from(j.at("weights"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioFormatError(std::string("scenario: ") + e.what());
  }
}

inline void save_scenario(const std::string& path, const Scenario& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file " + path);
  out << scenario_to_json(s).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing scenario file " + path);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioFormatError(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace mmplan
