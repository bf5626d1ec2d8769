#pragma once

// Generated benchmark scenarios. Each one is built around a known-feasible
// whole-body trajectory (the certificate); obstacles are placed afterwards
// so that they keep a margin from every certificate query point, and the
// scripted waypoints are the certificate's key end-effector poses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmplan/planner.hpp"

namespace mmplan {

enum class Family { FreeSpace, OutOfReach, Corridor, PickPlace };

inline const std::vector<Family>& all_families() {
  static const std::vector<Family> f = {Family::FreeSpace, Family::OutOfReach, Family::Corridor,
                                        Family::PickPlace};
  return f;
}

inline std::string to_string(Family f) {
  switch (f) {
    case Family::FreeSpace: return "FreeSpace";
    case Family::OutOfReach: return "OutOfReach";
    case Family::Corridor: return "Corridor";
    case Family::PickPlace: return "PickPlace";
  }
  return "?";
}

inline Family family_from_string(const std::string& s) {
  for (Family f : all_families()) {
    if (to_string(f) == s) return f;
  }
  throw std::invalid_argument("unknown scenario family '" + s + "'");
}

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline AxisBox default_base_geometry() { return {Vec3(-0.3, -0.22, 0.0), Vec3(0.3, 0.22, 0.2)}; }

struct Scenario {
  std::string name;
  Family family = Family::FreeSpace;
  std::uint64_t rng_seed = 0;
  Scene scene;
  KinematicChain chain = default_arm();
  AxisBox base_geometry = default_base_geometry();
  WholeBodyState start_state;
  std::vector<WaypointPair> waypoints;
  /// One known-feasible trajectory per waypoint pair; empty when absent.
  std::vector<Trajectory> certificate;
  std::size_t n_q = 64;
  std::uint64_t query_seed = 0;
  double field_resolution = 0.02;
  CostWeights weights;
};

inline std::shared_ptr<const DistanceField> build_scenario_field(const Scenario& s) {
  FieldOptions opt;
  opt.resolution = s.field_resolution;
  opt.padding = std::max(opt.padding, 2.0 * s.weights.epsilon0);
  return std::make_shared<const DistanceField>(build_field(s.scene, opt));
}

inline PlanningContext make_context(const Scenario& s, std::shared_ptr<const DistanceField> field,
                                    const CostWeights& weights) {
  return PlanningContext{s.chain, std::move(field),
                         sample_query_points(s.chain, s.base_geometry, s.n_q, s.query_seed),
                         weights, IkOptions{}};
}

inline PlanningContext make_context(const Scenario& s, std::shared_ptr<const DistanceField> field) {
  return make_context(s, std::move(field), s.weights);
}

struct CertificateCheck {
  bool present = false;
  bool ik_converged = true;
  double collision = 0.0;
  bool consistent = true;  // segments chain and match the waypoint script
  std::string detail;

  bool ok() const { return present && ik_converged && collision == 0.0 && consistent; }
};

/// Evaluates the certificate through the cost stack of `ctx`.
inline CertificateCheck check_certificate(const Scenario& s, const PlanningContext& ctx) {
  CertificateCheck c;
  c.present = !s.certificate.empty();
  if (!c.present) {
    c.detail = "no certificate";
    return c;
  }
  if (s.certificate.size() != s.waypoints.size()) {
    c.consistent = false;
    c.detail = "certificate has " + std::to_string(s.certificate.size()) + " segments for " +
               std::to_string(s.waypoints.size()) + " waypoint pairs";
    return c;
  }
  for (std::size_t i = 0; i < s.certificate.size(); ++i) {
    const Trajectory& seg = s.certificate[i];
    seg.validate();
    const ObjectiveReport r = total_objective(seg, ctx);
    for (std::size_t t = 0; t < r.ik_results.size(); ++t) {
      if (!r.ik_results[t].converged()) {
        c.ik_converged = false;
        c.detail = "segment " + std::to_string(i) + " sample " + std::to_string(t) + " IK failed";
      }
    }
    c.collision += r.collide;
    const LiftedWaypoints w = lift_waypoint(s.waypoints[i]);
    const auto dp = [](const Pose3& a, const Pose3& b) { return (a.position() - b.position()).norm(); };
    if (dp(seg.ee_targets.front(), w.current) > 1e-9 || dp(seg.ee_targets.back(), w.next) > 1e-9) {
      c.consistent = false;
      c.detail = "segment " + std::to_string(i) + " does not match its waypoints";
    }
  }
  if (c.collision > 0.0 && c.detail.empty()) c.detail = "certificate collides";
  return c;
}

namespace detail {

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(gen); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
};

/// Planar frame used to place a scenario built in local coordinates. Yaw is a
/// multiple of pi/2 so axis-aligned boxes stay axis-aligned.
struct Frame {
  BasePose pose;

  Vec3 point(const Vec3& p) const { return lift_to_pose3(pose) * p; }
  Pose3 pose3(const Pose3& p) const { return lift_to_pose3(pose) * p; }
  BasePose base(const BasePose& b) const { return compose(pose, b); }

  Shape shape(const Shape& s) const {
    if (const auto* sp = std::get_if<Sphere>(&s)) return Sphere{point(sp->center), sp->radius};
    if (const auto* cy = std::get_if<Cylinder>(&s)) {
      return Cylinder{point(cy->base_center), cy->radius, cy->height};
    }
    const auto& b = std::get<AxisBox>(s);
    const Vec3 p = point(b.min);
    const Vec3 q = point(b.max);
    return AxisBox{p.cwiseMin(q), p.cwiseMax(q)};
  }
};

inline JointVector perturbed(const KinematicChain& chain, const JointVector& q, Rng& rng,
                             double sigma) {
  JointVector out = q;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += rng.normal(sigma);
  return chain.clamp(out);
}

/// Tool pointing straight down with the given yaw about the vertical.
inline Quat tool_down(double yaw) {
  return yaw_rotation(yaw) * Quat(Eigen::AngleAxisd(std::numbers::pi / 2.0, Vec3::UnitY()));
}

/// Key whole-body poses of a scenario: the robot state at each waypoint.
struct KeyPose {
  BasePose base;
  Pose3 ee_world;
  double gripper = 1.0;
};

/// Interpolates between consecutive key poses (end effector in the world,
/// base linearly) and solves IK along each segment exactly as the cost stack
/// does. Returns nothing if any sample fails IK.
inline std::optional<std::vector<Trajectory>> certify_path(const std::vector<KeyPose>& keys,
                                                           const JointVector& start_joints,
                                                           const KinematicChain& chain,
                                                           const CostWeights& w, double step) {
  IkOptions opt;
  opt.max_iters = w.n_max;
  std::vector<Trajectory> segs;
  WholeBodyState current{keys.front().base, start_joints, keys.front().gripper};
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    const std::size_t steps = interpolation_steps(keys[i].ee_world, keys[i + 1].ee_world, step);
    Trajectory traj;
    JointVector seed = current.joints;
    for (std::size_t k = 0; k <= steps; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(steps);
      WholeBodyState st = current;
      st.base = k == 0 ? current.base : interpolate(keys[i].base, keys[i + 1].base, u);
      const Pose3 target = interpolate(keys[i].ee_world, keys[i + 1].ee_world, u);
      if (k > 0) {
        const IkResult ik = solve_ik(chain, gamma_to_base(st.base, target), seed, opt);
        if (!ik.converged()) return std::nullopt;
        st.joints = ik.joints;
        seed = ik.joints;
        st.gripper = k == steps ? keys[i + 1].gripper : current.gripper;
      }
      traj.states.push_back(st);
      traj.ee_targets.push_back(target);
    }
    current = traj.states.back();
    segs.push_back(std::move(traj));
  }
  return segs;
}

inline std::vector<Vec3> certificate_points(const std::vector<Trajectory>& segs,
                                            const QueryPointSet& qps, const KinematicChain& chain) {
  std::vector<Vec3> pts;
  for (const Trajectory& seg : segs) {
    for (const WholeBodyState& st : seg.states) {
      const auto p = materialize_points(qps, st, chain);
      pts.insert(pts.end(), p.begin(), p.end());
    }
  }
  return pts;
}

inline double clearance(const Scene& scene, const std::vector<Vec3>& pts) {
  double d = kEmptySceneDistance;
  for (const Vec3& p : pts) d = std::min(d, analytic_distance(scene, p));
  return d;
}

/// Grows the workspace to hold every obstacle, every key base and the robot
/// around it.
inline AxisBox fit_workspace(const std::vector<Obstacle>& obstacles,
                             const std::vector<KeyPose>& keys) {
  Vec3 lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0);
  Vec3 hi(-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 1.5);
  for (const KeyPose& k : keys) {
    lo = lo.cwiseMin(Vec3(k.base.x() - 1.2, k.base.y() - 1.2, 0.0));
    hi = hi.cwiseMax(Vec3(k.base.x() + 1.2, k.base.y() + 1.2, 1.5));
  }
  for (const Obstacle& o : obstacles) {
    const AxisBox b = bounding_box(o.shape);
    lo = lo.cwiseMin(b.min);
    hi = hi.cwiseMax(b.max);
  }
  return {lo, hi};
}

inline std::vector<WaypointPair> script_from(const std::vector<KeyPose>& keys) {
  std::vector<WaypointPair> out;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    const BasePose& b = keys[i].base;
    out.push_back({gamma_to_base(b, keys[i].ee_world), b, gamma_to_base(b, keys[i + 1].ee_world),
                   keys[i + 1].gripper});
  }
  return out;
}

struct Draft {
  std::vector<KeyPose> keys;
  JointVector start_joints;
  std::vector<Obstacle> fixed;  // obstacles that must keep the margin
  bool clutter = false;
};

inline std::optional<Draft> draft_free_space(const KinematicChain& chain, Rng& rng) {
  const BasePose b(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-3.1, 3.1));
  Draft d;
  d.start_joints = perturbed(chain, default_ready_joints(), rng, 0.15);
  JointVector q = d.start_joints;
  d.keys.push_back({b, gamma_to_world(b, forward_kinematics(chain, q)), 1.0});
  for (int i = 0; i < 2; ++i) {
    q = perturbed(chain, q, rng, 0.15);
    d.keys.push_back({b, gamma_to_world(b, forward_kinematics(chain, q)), i == 0 ? 0.0 : 1.0});
  }
  for (const KeyPose& k : d.keys) {
    if (k.ee_world.position().z() < 0.15) return std::nullopt;
  }
  return d;
}

inline std::optional<Draft> draft_out_of_reach(const KinematicChain& chain, Rng& rng) {
  const Frame f{BasePose(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-3.1, 3.1))};
  const BasePose b0 = f.base(BasePose(0.0, 0.0, 0.0));
  const BasePose b1 =
      f.base(BasePose(rng.uniform(0.9, 1.2), rng.uniform(-0.25, 0.25), rng.uniform(-0.3, 0.3)));
  Draft d;
  d.start_joints = perturbed(chain, default_ready_joints(), rng, 0.1);
  const JointVector q1 = perturbed(chain, default_ready_joints(), rng, 0.1);
  d.keys.push_back({b0, gamma_to_world(b0, forward_kinematics(chain, d.start_joints)), 1.0});
  d.keys.push_back({b1, gamma_to_world(b1, forward_kinematics(chain, q1)), 1.0});
  const Vec3 mount = gamma_to_world(b0, chain.base_mount()).position();
  if ((d.keys[1].ee_world.position() - mount).norm() <= chain.total_reach() + 0.2) return std::nullopt;
  d.clutter = true;
  return d;
}

inline std::optional<Draft> draft_corridor(const KinematicChain& chain, Rng& rng) {
  const Frame f{BasePose(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                         rng.integer(-1, 2) * std::numbers::pi / 2.0)};
  const double wall_x = rng.uniform(0.85, 1.0);
  const double gap_center = rng.uniform(-0.15, 0.15);
  const double gap = rng.uniform(0.95, 1.1);
  const double height = 1.2;
  Draft d;
  d.fixed.push_back({f.shape(AxisBox{Vec3(wall_x - 0.05, -1.6, 0.0),
                                     Vec3(wall_x + 0.05, gap_center - gap / 2.0, height)}),
                     false});
  d.fixed.push_back({f.shape(AxisBox{Vec3(wall_x - 0.05, gap_center + gap / 2.0, 0.0),
                                     Vec3(wall_x + 0.05, 1.6, height)}),
                     false});
  const BasePose b0 = f.base(BasePose(0.0, 0.0, rng.uniform(-0.1, 0.1)));
  const BasePose b1 = f.base(BasePose(wall_x + rng.uniform(0.7, 0.8),
                                      gap_center * rng.uniform(0.5, 1.0), rng.uniform(-0.1, 0.1)));
  d.start_joints = perturbed(chain, default_ready_joints(), rng, 0.08);
  const JointVector q1 = perturbed(chain, default_ready_joints(), rng, 0.08);
  d.keys.push_back({b0, gamma_to_world(b0, forward_kinematics(chain, d.start_joints)), 1.0});
  d.keys.push_back({b1, gamma_to_world(b1, forward_kinematics(chain, q1)), 1.0});
  return d;
}

inline std::optional<Draft> draft_pick_place(const KinematicChain& chain, Rng& rng) {
  const Frame f{BasePose(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                         rng.integer(-1, 2) * std::numbers::pi / 2.0)};
  const double table_h = 0.2;
  const double y0 = 0.3 + 0.13 + rng.uniform(0.02, 0.08);
  const double place_x = rng.uniform(1.4, 1.7);
  const Vec3 object(rng.uniform(-0.1, 0.1), y0 + rng.uniform(0.06, 0.1), table_h);
  const Vec3 place(place_x + rng.uniform(-0.1, 0.1), y0 + rng.uniform(0.06, 0.1), table_h);
  Draft d;
  d.fixed.push_back({f.shape(AxisBox{Vec3(-0.3, y0, 0.0), Vec3(0.3, y0 + 0.5, table_h)}), false});
  d.fixed.push_back(
      {f.shape(AxisBox{Vec3(place_x - 0.3, y0, 0.0), Vec3(place_x + 0.3, y0 + 0.5, table_h)}), false});
  d.fixed.push_back({f.shape(Cylinder{object, 0.03, 0.18}), true});

  const double tool_yaw = std::numbers::pi / 2.0 + rng.uniform(-0.4, 0.4);
  const BasePose pick_base = f.base(BasePose(0.0, 0.0, std::numbers::pi / 2.0));
  const BasePose place_base = f.base(BasePose(place_x, 0.0, std::numbers::pi / 2.0));
  const auto world_pose = [&](const Vec3& p, double yaw) {
    return f.pose3(Pose3(p, tool_down(yaw)));
  };
  const Pose3 pregrasp = world_pose(object + Vec3(0, 0, 0.27), tool_yaw);
  const Pose3 grasp = world_pose(object + Vec3(0, 0, 0.15), tool_yaw);
  const Pose3 lift = world_pose(object + Vec3(0, 0, 0.35), tool_yaw);
  const Pose3 drop = world_pose(place + Vec3(0, 0, 0.27), tool_yaw + rng.uniform(-0.2, 0.2));

  // Start configuration: IK to the pre-grasp from a few deterministic seeds.
  std::optional<JointVector> q0;
  for (int attempt = 0; attempt < 8 && !q0; ++attempt) {
    const JointVector seed = perturbed(chain, default_ready_joints(), rng, attempt == 0 ? 0.0 : 0.4);
    const IkResult ik = solve_ik(chain, gamma_to_base(pick_base, pregrasp), seed);
    if (ik.converged()) q0 = ik.joints;
  }
  if (!q0) return std::nullopt;
  d.start_joints = *q0;
  d.keys = {{pick_base, gamma_to_world(pick_base, forward_kinematics(chain, *q0)), 1.0},
            {pick_base, grasp, 0.0},
            {pick_base, lift, 0.0},
            {place_base, drop, 1.0}};
  return d;
}

}  // namespace detail

/// Deterministic per (family, seed, index). Throws GenerationError when no
/// certified instance is found within the retry budget.
inline Scenario generate_scenario(Family family, std::uint64_t seed, std::size_t index,
                                  const PlannerConfig& planner = {}) {
  const KinematicChain chain = default_arm();
  const CostWeights weights;
  const double margin = weights.epsilon0 + 0.03;
  detail::Rng rng(detail::mix_seed(seed, 0xFA0 + static_cast<std::uint64_t>(family), index));
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::optional<detail::Draft> draft;
    switch (family) {
      case Family::FreeSpace: draft = detail::draft_free_space(chain, rng); break;
      case Family::OutOfReach: draft = detail::draft_out_of_reach(chain, rng); break;
      case Family::Corridor: draft = detail::draft_corridor(chain, rng); break;
      case Family::PickPlace: draft = detail::draft_pick_place(chain, rng); break;
    }
    if (!draft) continue;
    auto cert = detail::certify_path(draft->keys, draft->start_joints, chain, weights, planner.step_size);
    if (!cert) continue;

    Scenario s;
    s.name = to_string(family) + "_" + std::to_string(seed) + "_" + std::to_string(index);
    s.family = family;
    s.rng_seed = seed;
    s.query_seed = detail::mix_seed(seed, 0x9E7, index);
    s.chain = chain;
    s.weights = weights;
    const QueryPointSet qps = sample_query_points(chain, s.base_geometry, s.n_q, s.query_seed);
    const auto pts = detail::certificate_points(*cert, qps, chain);

    s.scene.obstacles = draft->fixed;
    if (detail::clearance(s.scene, pts) < margin) continue;
    s.scene.workspace = detail::fit_workspace(s.scene.obstacles, draft->keys);
    if (draft->clutter) {
      const int count = rng.integer(0, 3);
      for (int c = 0; c < count; ++c) {
        for (int tries = 0; tries < 50; ++tries) {
          const AxisBox& ws = s.scene.workspace;
          const double r = rng.uniform(0.1, 0.25);
          const Vec3 center(rng.uniform(ws.min.x() + r, ws.max.x() - r),
                            rng.uniform(ws.min.y() + r, ws.max.y() - r), rng.uniform(0.3, 1.0));
          Scene probe;
          probe.obstacles.push_back({Sphere{center, r}, false});
          if (detail::clearance(probe, pts) >= margin) {
            s.scene.obstacles.push_back(probe.obstacles.front());
            break;
          }
        }
      }
    }
    s.scene.validate();
    s.start_state = cert->front().states.front();
    s.waypoints = detail::script_from(draft->keys);
    // Later waypoints are predicted from where the certificate stands.
    for (std::size_t i = 0; i < s.waypoints.size(); ++i) {
      const BasePose b = (*cert)[i].states.front().base;
      s.waypoints[i].base_at_prediction = b;
      s.waypoints[i].q_current = gamma_to_base(b, (*cert)[i].ee_targets.front());
      s.waypoints[i].q_next = gamma_to_base(b, (*cert)[i].ee_targets.back());
    }
    s.certificate = std::move(*cert);
    return s;
  }
  throw GenerationError("generate_scenarios: no certified " + to_string(family) +
                        " scenario for seed " + std::to_string(seed) + " index " +
                        std::to_string(index));
}

inline std::vector<Scenario> generate_scenarios(Family family, std::size_t count, std::uint64_t seed,
                                                const PlannerConfig& planner = {}) {
  if (count < 1) throw std::invalid_argument("generate_scenarios: count must be >= 1");
  std::vector<Scenario> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_scenario(family, seed, i, planner));
  return out;
}

}  // namespace mmplan
