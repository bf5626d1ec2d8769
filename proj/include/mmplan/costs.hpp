#pragma once

// Physical-feasibility objective: reachability, smoothness and collision terms,
// their weighted total, and the upper-level base-placement objective.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmplan/distance_field.hpp"
#include "mmplan/kinematics.hpp"
#include "mmplan/query_points.hpp"

namespace mmplan {

struct WholeBodyState {
  BasePose base;
  JointVector joints;
  double gripper = 1.0;  // openness in [0, 1]
};

/// Trajectory samples between two waypoints. `ee_targets[t]` is the
/// world-frame end-effector pose requested at sample t; `states[t].joints`
/// holds the configuration realizing it.
struct Trajectory {
  std::vector<WholeBodyState> states;
  std::vector<Pose3> ee_targets;

  std::size_t size() const { return states.size(); }

  void validate() const {
    if (states.size() < 2) throw std::invalid_argument("Trajectory: at least 2 states required");
    if (ee_targets.size() != states.size()) {
      throw std::invalid_argument("Trajectory: ee_targets and states differ in length");
    }
  }
};

struct CostWeights {
  double lambda_r = 10.0;
  double lambda_s = 1.0;
  double lambda_c = 0.6;
  double epsilon0 = 0.1;  // m
  double c0 = 1e3;
  std::size_t n_max = 100;
  double alpha = 0.5;
  std::size_t k_top = 3;
  std::size_t n_candidates = 16;
  double sigma_pos = 0.05;  // m
  double sigma_rot = 0.1;   // rad
  double yaw_weight = 1.0;

  void validate() const {
    if (lambda_r < 0.0 || lambda_s < 0.0 || lambda_c < 0.0) {
      throw std::invalid_argument("CostWeights: lambdas must be non-negative");
    }
    if (!(epsilon0 > 0.0) || !(c0 >= 1e3) || n_max < 1 || !(alpha > 0.0) || k_top < 1 ||
        n_candidates < k_top || !(sigma_pos > 0.0) || !(sigma_rot > 0.0) || !(yaw_weight > 0.0)) {
      throw std::invalid_argument("CostWeights: invalid hyperparameter");
    }
  }
};

/// Immutable inputs shared by every cost evaluation.
struct PlanningContext {
  KinematicChain chain;
  std::shared_ptr<const DistanceField> field;
  QueryPointSet qps;
  CostWeights weights;
  IkOptions ik;

  IkOptions ik_options() const {
    IkOptions o = ik;
    o.max_iters = weights.n_max;
    return o;
  }
};

struct ObjectiveReport {
  double reach = 0.0;    // F_r
  double smooth = 0.0;   // F_s
  double collide = 0.0;  // F_c
  double total = 0.0;    // O
  std::vector<IkResult> ik_results;
  /// Per-sample contributions; smooth_terms[t] is the step from t-1 to t.
  std::vector<double> reach_terms;
  std::vector<double> smooth_terms;
  std::vector<double> collide_terms;
};

inline double weighted_total(const CostWeights& w, double reach, double smooth, double collide) {
  return w.lambda_r * reach + w.lambda_s * smooth + w.lambda_c * collide;
}

/// N_IK / N_max when IK converged, C0 otherwise.
inline double reachability_cost(const IkResult& ik, const CostWeights& w) {
  if (!ik.converged()) return w.c0;
  return static_cast<double>(ik.iterations) / static_cast<double>(w.n_max);
}

/// Norm of the planar base step (x, y, wrapped yaw).
inline double base_step(const BasePose& a, const BasePose& b, double yaw_weight = 1.0) {
  const double dx = b.x() - a.x();
  const double dy = b.y() - a.y();
  const double dyaw = yaw_weight * wrap_angle(b.yaw() - a.yaw());
  return std::sqrt(dx * dx + dy * dy + dyaw * dyaw);
}

inline double joint_step(const JointVector& a, const JointVector& b) { return (b - a).norm(); }

/// Sum over consecutive samples of the joint-space step plus the base step.
inline double smoothness_cost(const Trajectory& traj, std::span<const JointVector> ik_joints,
                              double yaw_weight = 1.0) {
  if (ik_joints.size() != traj.states.size()) {
    throw std::invalid_argument("smoothness_cost: " + std::to_string(ik_joints.size()) +
                                " joint vectors for " + std::to_string(traj.states.size()) +
                                " states");
  }
  double total = 0.0;
  for (std::size_t t = 1; t < ik_joints.size(); ++t) {
    if (ik_joints[t].size() != ik_joints[t - 1].size()) {
      throw std::invalid_argument("smoothness_cost: joint vector length mismatch");
    }
    total += joint_step(ik_joints[t - 1], ik_joints[t]) +
             base_step(traj.states[t - 1].base, traj.states[t].base, yaw_weight);
  }
  return total;
}

/// sum_j max(0, epsilon0 - D(q_j)) for one set of world points.
inline double points_collision_cost(std::span<const Vec3> points, const DistanceField& field,
                                    double epsilon0) {
  double c = 0.0;
  for (const Vec3& p : points) c += std::max(0.0, epsilon0 - field.query(p));
  return c;
}

inline std::vector<Vec3> materialize_points(const QueryPointSet& qps, const WholeBodyState& state,
                                            const KinematicChain& chain) {
  return materialize_points(qps, state.base, state.joints, chain);
}

/// Double sum over every state and every query point.
inline double collision_cost(const Trajectory& traj, const QueryPointSet& qps,
                             const DistanceField& field, const KinematicChain& chain,
                             const CostWeights& w) {
  double c = 0.0;
  for (const WholeBodyState& s : traj.states) {
    c += points_collision_cost(materialize_points(qps, s, chain), field, w.epsilon0);
  }
  return c;
}

/// Smallest field distance over all materialized query points of all states.
inline double min_clearance(const Trajectory& traj, const PlanningContext& ctx) {
  double d = kEmptySceneDistance;
  for (const WholeBodyState& s : traj.states) {
    for (const Vec3& p : materialize_points(ctx.qps, s, ctx.chain)) {
      d = std::min(d, ctx.field->query(p));
    }
  }
  return d;
}

/// Evaluates the whole-trajectory objective. IK runs per sample toward the
/// sample's world target expressed in its base frame, seeded with the first
/// state's joints and then with the previous sample's solution. Smoothness
/// and collision use the solved joints.
inline ObjectiveReport total_objective(const Trajectory& traj, const PlanningContext& ctx) {
  traj.validate();
  const CostWeights& w = ctx.weights;
  const IkOptions ik_opt = ctx.ik_options();
  const std::size_t n = traj.size();

  ObjectiveReport r;
  r.ik_results.reserve(n);
  r.reach_terms.resize(n);
  r.smooth_terms.assign(n, 0.0);
  r.collide_terms.resize(n);

  JointVector seed = traj.states.front().joints;
  for (std::size_t t = 0; t < n; ++t) {
    const Pose3 target = gamma_to_base(traj.states[t].base, traj.ee_targets[t]);
    IkResult ik = solve_ik(ctx.chain, target, seed, ik_opt);
    seed = ik.joints;
    r.reach_terms[t] = reachability_cost(ik, w);
    r.collide_terms[t] = points_collision_cost(
        materialize_points(ctx.qps, traj.states[t].base, ik.joints, ctx.chain), *ctx.field,
        w.epsilon0);
    if (t > 0) {
      r.smooth_terms[t] = joint_step(r.ik_results[t - 1].joints, ik.joints) +
                          base_step(traj.states[t - 1].base, traj.states[t].base, w.yaw_weight);
    }
    r.ik_results.push_back(std::move(ik));
  }
  r.reach = std::accumulate(r.reach_terms.begin(), r.reach_terms.end(), 0.0);
  r.smooth = std::accumulate(r.smooth_terms.begin(), r.smooth_terms.end(), 0.0);
  r.collide = std::accumulate(r.collide_terms.begin(), r.collide_terms.end(), 0.0);
  r.total = weighted_total(w, r.reach, r.smooth, r.collide);
  return r;
}

/// Copy of `traj` with every state's joints replaced by the report's IK
/// solutions.
inline Trajectory with_solved_joints(Trajectory traj, const ObjectiveReport& report) {
  for (std::size_t t = 0; t < traj.size(); ++t) traj.states[t].joints = report.ik_results[t].joints;
  return traj;
}

struct PoseEvaluation {
  double value = 0.0;
  IkResult ik;
};

/// Single-sample objective O(x_b, x_e): reachability and collision of the arm
/// target from this base, plus the step from the previously committed state.
inline PoseEvaluation pose_objective(const BasePose& base, const Pose3& ee_world,
                                     const WholeBodyState& previous, const PlanningContext& ctx) {
  const CostWeights& w = ctx.weights;
  PoseEvaluation e;
  e.ik = solve_ik(ctx.chain, gamma_to_base(base, ee_world), previous.joints, ctx.ik_options());
  const double reach = reachability_cost(e.ik, w);
  const double smooth = joint_step(previous.joints, e.ik.joints) +
                        base_step(previous.base, base, w.yaw_weight);
  const double collide = points_collision_cost(
      materialize_points(ctx.qps, base, e.ik.joints, ctx.chain), *ctx.field, w.epsilon0);
  e.value = weighted_total(w, reach, smooth, collide);
  return e;
}

/// Expected-plus-top-tier aggregate: the sum over all candidates plus alpha
/// times the sum of the k_top lowest. Ties are broken by candidate index.
inline double upper_objective_from_values(std::span<const double> objectives, double alpha,
                                          std::size_t k_top) {
  if (objectives.empty()) throw std::invalid_argument("upper_objective: empty candidate set");
  if (k_top < 1 || k_top > objectives.size()) {
    throw std::invalid_argument("upper_objective: k_top must be in [1, |M|]");
  }
  std::vector<std::size_t> order(objectives.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_top), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return objectives[a] < objectives[b] ||
                             (objectives[a] == objectives[b] && a < b);
                    });
  double expected = 0.0;
  for (double v : objectives) expected += v;
  double top = 0.0;
  for (std::size_t k = 0; k < k_top; ++k) top += objectives[order[k]];
  return expected + alpha * top;
}

/// Upper-level score of a base pose against sampled world-frame arm targets.
inline double upper_objective(const BasePose& base, std::span<const Pose3> sampled_arm,
                              const WholeBodyState& previous, const PlanningContext& ctx) {
  if (sampled_arm.empty()) throw std::invalid_argument("upper_objective: empty candidate set");
  std::vector<double> values;
  values.reserve(sampled_arm.size());
  for (const Pose3& target : sampled_arm) {
    values.push_back(pose_objective(base, target, previous, ctx).value);
  }
  return upper_objective_from_values(values, ctx.weights.alpha,
                                     std::min(ctx.weights.k_top, values.size()));
}

/// Gaussian perturbations of a world-frame arm target.
inline std::vector<Pose3> sample_arm_candidates(const Pose3& center, std::size_t count,
                                                double sigma_pos, double sigma_rot,
                                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Pose3> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3 dp(normal(rng), normal(rng), normal(rng));
    const Vec3 dr(normal(rng), normal(rng), normal(rng));
    out.emplace_back(center.position() + sigma_pos * dp,
                     exp_rotation(sigma_rot * dr) * center.orientation());
  }
  return out;
}

}  // namespace mmplan
