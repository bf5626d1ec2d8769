#pragma once

// Segment-wise whole-body trajectory optimization between consecutive
// end-effector waypoints: interpolation initialization, alternating base
// (upper) and end-effector (lower) annealing blocks, and a direct mode that
// anneals the whole segment at once.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmplan/anneal.hpp"
#include "mmplan/costs.hpp"

namespace mmplan {

struct WaypointPair {
  Pose3 q_current;              // base frame at prediction time
  BasePose base_at_prediction;  // base pose when the waypoints were predicted
  Pose3 q_next;                 // base frame at prediction time
  double gripper_next = 1.0;
};

enum class SearchMode { BiLevel, Direct };

inline const char* to_string(SearchMode m) { return m == SearchMode::BiLevel ? "bilevel" : "direct"; }

struct PlannerConfig {
  double step_size = 0.05;  // m per step for translation, rad per step for rotation
  double mu_s = 0.01;       // m
  std::size_t n_up = 5;
  std::size_t n_low = 5;
  std::size_t max_outer_rounds = 20;
  SearchMode search_mode = SearchMode::BiLevel;
  double base_half_width = 1.0;  // m, x and y
  double yaw_half_width = std::numbers::pi;
  double ee_pos_half_width = 0.1;  // m
  double ee_rot_half_width = 0.3;  // rad, per rotation-vector component
  /// Evaluation budget of one annealing block. Direct mode spends
  /// (n_up + n_low) blocks' worth per outer round.
  std::size_t evals_per_block = 60;
  AnnealConfig anneal;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(step_size > 0.0)) throw std::invalid_argument("PlannerConfig: step_size must be > 0");
    if (!(mu_s > 0.0)) throw std::invalid_argument("PlannerConfig: mu_s must be > 0");
    if (n_up < 1 || n_low < 1 || max_outer_rounds < 1) {
      throw std::invalid_argument("PlannerConfig: block and round counts must be >= 1");
    }
    if (!(base_half_width > 0.0) || !(yaw_half_width > 0.0) || !(ee_pos_half_width > 0.0) ||
        !(ee_rot_half_width > 0.0)) {
      throw std::invalid_argument("PlannerConfig: search half-widths must be > 0");
    }
    if (evals_per_block < 12) throw std::invalid_argument("PlannerConfig: evals_per_block must be >= 12");
  }
};

struct PlanResult {
  Trajectory trajectory;  // joints are the IK solutions of `report`
  ObjectiveReport report;
  bool converged = false;
  std::size_t outer_rounds_used = 0;
  double wall_time_ms = 0.0;
  /// Objective calls made by the annealing runs.
  std::size_t objective_evals = 0;
  std::size_t anneal_runs = 0;
};

struct LiftedWaypoints {
  Pose3 current;
  Pose3 next;
};

inline LiftedWaypoints lift_waypoint(const WaypointPair& wp) {
  return {gamma_to_world(wp.base_at_prediction, wp.q_current),
          gamma_to_world(wp.base_at_prediction, wp.q_next)};
}

/// World-frame end-effector pose of a state.
inline Pose3 end_effector_world(const WholeBodyState& s, const KinematicChain& chain) {
  return gamma_to_world(s.base, forward_kinematics(chain, s.joints));
}

inline std::size_t interpolation_steps(const Pose3& a, const Pose3& b, double step_size) {
  const PoseDelta d = pose_delta(a, b);
  const double by_pos = std::ceil(d.translation / step_size - 1e-9);
  const double by_rot = std::ceil(d.rotation / step_size - 1e-9);
  return static_cast<std::size_t>(std::max({by_pos, by_rot, 1.0}));
}

/// Equal-interval interpolation between the lifted waypoints with the base held
/// at the start pose.
inline Trajectory init_trajectory(const WholeBodyState& start, const Pose3& q_start,
                                  const Pose3& q_end, const PlannerConfig& cfg,
                                  const KinematicChain& chain) {
  const Pose3 ee = end_effector_world(start, chain);
  const double gap = (ee.position() - q_start.position()).norm();
  if (gap > 10.0 * cfg.mu_s) {
    throw std::invalid_argument("init_trajectory: start end effector is " + std::to_string(gap) +
                                " m from the first waypoint");
  }
  const std::size_t steps = interpolation_steps(q_start, q_end, cfg.step_size);
  Trajectory traj;
  traj.states.assign(steps + 1, start);
  traj.ee_targets.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    traj.ee_targets.push_back(
        interpolate(q_start, q_end, static_cast<double>(k) / static_cast<double>(steps)));
  }
  return traj;
}

/// Final end effector within mu_s of the goal, every sample IK-feasible and no
/// query point inside an obstacle.
inline bool segment_feasible(const Trajectory& solved, const ObjectiveReport& report,
                             const Pose3& goal, const PlanningContext& ctx, double mu_s) {
  for (const IkResult& r : report.ik_results) {
    if (!r.converged()) return false;
  }
  const Pose3 ee = end_effector_world(solved.states.back(), ctx.chain);
  if ((ee.position() - goal.position()).norm() > mu_s) return false;
  return min_clearance(solved, ctx) >= 0.0;
}

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
  std::uint64_t s = seed;
  s ^= splitmix64(s) + a;
  s ^= splitmix64(s) + b;
  s ^= splitmix64(s) + c;
  return splitmix64(s);
}

/// Working state of one segment optimization: the evolving trajectory and the
/// best one seen by total objective.
struct SegmentSearch {
  const PlanningContext& ctx;
  const PlannerConfig& cfg;
  Pose3 goal;
  Trajectory work;
  ObjectiveReport work_report;
  Trajectory best;
  ObjectiveReport best_report;
  std::size_t evals = 0;
  std::size_t runs = 0;

  SegmentSearch(const PlanningContext& c, const PlannerConfig& k, Pose3 g, Trajectory init)
      : ctx(c), cfg(k), goal(std::move(g)) {
    work_report = total_objective(init, ctx);
    work = with_solved_joints(std::move(init), work_report);
    best = work;
    best_report = work_report;
  }

  void commit(Trajectory t) {
    work_report = total_objective(t, ctx);
    work = with_solved_joints(std::move(t), work_report);
    if (work_report.total < best_report.total) {
      best = work;
      best_report = work_report;
    }
  }

  template <class F>
  OptResult anneal(F&& objective, const SearchSpace& space, std::uint64_t seed,
                   std::size_t budget) {
    AnnealConfig ac = cfg.anneal;
    ac.max_evals = budget;
    ac.rng_seed = seed;
    OptResult r = minimize(objective, space, ac);
    evals += r.evals_used;
    ++runs;
    return r;
  }

  bool feasible() const { return segment_feasible(best, best_report, goal, ctx, cfg.mu_s); }
};

inline BasePose base_from(const Eigen::VectorXd& x, Eigen::Index at = 0) {
  return BasePose(x[at], x[at + 1], x[at + 2]);
}

inline Pose3 offset_target(const Pose3& center, const Eigen::VectorXd& x, Eigen::Index at = 0) {
  const Vec3 dp(x[at], x[at + 1], x[at + 2]);
  const Vec3 dr(x[at + 3], x[at + 4], x[at + 5]);
  return Pose3(center.position() + dp, exp_rotation(dr) * center.orientation());
}

inline void base_bounds(const BasePose& b, const PlannerConfig& cfg, SearchSpace& s, Eigen::Index at) {
  s.lower.segment<3>(at) << b.x() - cfg.base_half_width, b.y() - cfg.base_half_width,
      b.yaw() - cfg.yaw_half_width;
  s.upper.segment<3>(at) << b.x() + cfg.base_half_width, b.y() + cfg.base_half_width,
      b.yaw() + cfg.yaw_half_width;
}

inline void ee_bounds(const PlannerConfig& cfg, SearchSpace& s, Eigen::Index at) {
  s.lower.segment<3>(at).setConstant(-cfg.ee_pos_half_width);
  s.upper.segment<3>(at).setConstant(cfg.ee_pos_half_width);
  s.lower.segment<3>(at + 3).setConstant(-cfg.ee_rot_half_width);
  s.upper.segment<3>(at + 3).setConstant(cfg.ee_rot_half_width);
}

/// Anneals the base of sample `s` against the committed state s - 1.
inline void upper_step(SegmentSearch& S, std::size_t s, std::size_t round, std::size_t iter) {
  const PlanningContext& ctx = S.ctx;
  const WholeBodyState previous = S.work.states[s - 1];
  const auto candidates =
      sample_arm_candidates(S.work.ee_targets[s], ctx.weights.n_candidates, ctx.weights.sigma_pos,
                            ctx.weights.sigma_rot, mix_seed(S.cfg.seed, 1, round, iter));
  SearchSpace space{Eigen::VectorXd(3), Eigen::VectorXd(3)};
  base_bounds(S.work.states[s].base, S.cfg, space, 0);
  auto objective = [&](const Eigen::VectorXd& x) {
    return upper_objective(base_from(x), candidates, previous, ctx);
  };
  const OptResult r =
      S.anneal(objective, space, mix_seed(S.cfg.seed, 2, round, iter), S.cfg.evals_per_block);
  Trajectory next = S.work;
  const BasePose moved_from = next.states[s].base;
  next.states[s].base = base_from(r.x_best);
  // Later samples still parked where this one was follow it.
  for (std::size_t k = s + 1; k < next.size() && next.states[k].base == moved_from; ++k) {
    next.states[k].base = next.states[s].base;
  }
  S.commit(std::move(next));
}

/// Anneals the end-effector target of interior sample `s` with every base fixed.
inline void lower_step(SegmentSearch& S, std::size_t s, std::size_t round, std::size_t iter) {
  const Pose3 center = S.work.ee_targets[s];
  SearchSpace space{Eigen::VectorXd(6), Eigen::VectorXd(6)};
  ee_bounds(S.cfg, space, 0);
  Trajectory trial = S.work;
  auto objective = [&](const Eigen::VectorXd& x) {
    trial.ee_targets[s] = offset_target(center, x);
    return total_objective(trial, S.ctx).total;
  };
  const OptResult r =
      S.anneal(objective, space, mix_seed(S.cfg.seed, 3, round, iter), S.cfg.evals_per_block);
  Trajectory next = S.work;
  next.ee_targets[s] = offset_target(center, r.x_best);
  S.commit(std::move(next));
}

/// One annealing run over every free variable of the segment: the base of
/// every sample after the first, plus end-effector target offset and gripper
/// of every interior sample. The last sample keeps its pinned target and
/// commanded gripper.
inline void direct_round(SegmentSearch& S, std::size_t round) {
  const std::size_t n = S.work.size();
  const Trajectory center = S.work;
  const auto dim = static_cast<Eigen::Index>(10 * (n - 2) + 3);
  SearchSpace space{Eigen::VectorXd(dim), Eigen::VectorXd(dim)};
  Eigen::VectorXd x0(dim);
  for (std::size_t t = 1; t < n; ++t) {
    const auto at = static_cast<Eigen::Index>(10 * (t - 1));
    base_bounds(center.states[t].base, S.cfg, space, at);
    x0.segment<3>(at) << center.states[t].base.x(), center.states[t].base.y(),
        center.states[t].base.yaw();
    if (t + 1 == n) break;
    ee_bounds(S.cfg, space, at + 3);
    x0.segment<6>(at + 3).setZero();
    space.lower[at + 9] = 0.0;
    space.upper[at + 9] = 1.0;
    x0[at + 9] = center.states[t].gripper;
  }
  const auto decode = [&](const Eigen::VectorXd& x) {
    Trajectory traj = center;
    for (std::size_t t = 1; t < n; ++t) {
      const auto at = static_cast<Eigen::Index>(10 * (t - 1));
      traj.states[t].base = base_from(x, at);
      if (t + 1 == n) break;
      traj.ee_targets[t] = offset_target(center.ee_targets[t], x, at + 3);
      traj.states[t].gripper = x[at + 9];
    }
    return traj;
  };
  auto objective = [&](const Eigen::VectorXd& x) { return total_objective(decode(x), S.ctx).total; };
  AnnealConfig ac = S.cfg.anneal;
  ac.max_evals = S.cfg.evals_per_block * (S.cfg.n_up + S.cfg.n_low);
  ac.rng_seed = mix_seed(S.cfg.seed, 4, round);
  const OptResult r = minimize(objective, space, ac, x0);
  S.evals += r.evals_used;
  ++S.runs;
  S.commit(decode(r.x_best));
}

}  // namespace detail

/// Plans one segment. Returns the best trajectory found by total objective;
/// `converged` reports whether it reaches the goal feasibly.
inline PlanResult plan_segment(const WholeBodyState& start, const WaypointPair& wp,
                               const PlanningContext& ctx, const PlannerConfig& cfg) {
  cfg.validate();
  ctx.weights.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const LiftedWaypoints lifted = lift_waypoint(wp);
  Trajectory init = init_trajectory(start, lifted.current, lifted.next, cfg, ctx.chain);
  init.states.back().gripper = wp.gripper_next;

  detail::SegmentSearch S(ctx, cfg, lifted.next, std::move(init));
  const std::size_t samples = S.work.size();
  std::size_t up_cursor = 0;
  std::size_t low_cursor = 0;
  std::size_t rounds = 0;
  while (rounds < cfg.max_outer_rounds) {
    if (cfg.search_mode == SearchMode::BiLevel) {
      for (std::size_t i = 0; i < cfg.n_up; ++i) {
        detail::upper_step(S, up_cursor + 1, rounds, i);
        up_cursor = (up_cursor + 1) % (samples - 1);
      }
      if (samples > 2) {
        for (std::size_t i = 0; i < cfg.n_low; ++i) {
          detail::lower_step(S, low_cursor + 1, rounds, i);
          low_cursor = (low_cursor + 1) % (samples - 2);
        }
      }
    } else {
      detail::direct_round(S, rounds);
    }
    ++rounds;
    if (S.feasible()) break;
  }

  PlanResult result;
  result.converged = S.feasible();
  result.trajectory = std::move(S.best);
  result.report = std::move(S.best_report);
  result.outer_rounds_used = rounds;
  result.objective_evals = S.evals;
  result.anneal_runs = S.runs;
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

/// Plans every segment in order, each from the previous segment's final
/// state. A segment whose waypoints are inconsistent with its start state is
/// recorded as a failed two-sample hold and the episode continues.
inline std::vector<PlanResult> plan_episode(const std::vector<WaypointPair>& waypoints,
                                            const WholeBodyState& start,
                                            const PlanningContext& ctx, const PlannerConfig& cfg) {
  if (waypoints.empty()) throw std::invalid_argument("plan_episode: no waypoints");
  std::vector<PlanResult> results;
  WholeBodyState current = start;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    PlannerConfig seg_cfg = cfg;
    seg_cfg.seed = cfg.seed + i;
    PlanResult r;
    try {
      r = plan_segment(current, waypoints[i], ctx, seg_cfg);
    } catch (const std::invalid_argument&) {
      const auto t0 = std::chrono::steady_clock::now();
      Trajectory hold;
      hold.states.assign(2, current);
      hold.ee_targets.assign(2, end_effector_world(current, ctx.chain));
      r.report = total_objective(hold, ctx);
      r.trajectory = with_solved_joints(std::move(hold), r.report);
      r.converged = false;
      r.wall_time_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    current = r.trajectory.states.back();
    current.gripper = waypoints[i].gripper_next;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace mmplan
