#pragma once

// Serial-chain forward kinematics and a damped-least-squares IK solver whose
// iteration count is reported exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmplan/geometry.hpp"

namespace mmplan {

using JointVector = Eigen::VectorXd;

/// One revolute joint followed by a rigid link. The joint rotates about
/// `axis` (expressed in the incoming frame), then `offset` carries the frame to
/// the next joint, or to the end effector for the last link.
struct Link {
  Pose3 offset;
  Vec3 axis = Vec3::UnitZ();
  double lower = -std::numbers::pi;
  double upper = std::numbers::pi;
};

class KinematicChain {
 public:
  KinematicChain() = default;

  KinematicChain(std::vector<Link> links, Pose3 base_mount)
      : links_(std::move(links)), base_mount_(base_mount) {
    if (links_.size() < 2) {
      throw std::invalid_argument("KinematicChain: at least 2 joints required");
    }
    for (std::size_t i = 0; i < links_.size(); ++i) {
      Link& l = links_[i];
      const double n = l.axis.norm();
      if (!(l.lower < l.upper)) {
        throw std::invalid_argument("KinematicChain: joint " + std::to_string(i) +
                                    " has lower >= upper");
      }
      if (!(n > 0.0) || !std::isfinite(n) || !l.offset.is_finite()) {
        throw std::invalid_argument("KinematicChain: joint " + std::to_string(i) +
                                    " has a degenerate axis or offset");
      }
      l.axis /= n;
      reach_ += l.offset.position().norm();
    }
    if (!(reach_ > 0.0)) {
      throw std::invalid_argument("KinematicChain: total reach must be positive");
    }
  }

  std::size_t dof() const { return links_.size(); }
  const std::vector<Link>& links() const { return links_; }
  const Pose3& base_mount() const { return base_mount_; }

  /// Sum of link translation norms; no end-effector position lies farther than
  /// this from the mount point.
  double total_reach() const { return reach_; }

  JointVector lower_limits() const {
    JointVector v(dof());
    for (std::size_t i = 0; i < dof(); ++i) v[i] = links_[i].lower;
    return v;
  }
  JointVector upper_limits() const {
    JointVector v(dof());
    for (std::size_t i = 0; i < dof(); ++i) v[i] = links_[i].upper;
    return v;
  }

  JointVector clamp(const JointVector& q) const {
    JointVector out = q;
    for (std::size_t i = 0; i < dof(); ++i) {
      out[i] = std::clamp(out[i], links_[i].lower, links_[i].upper);
    }
    return out;
  }

  bool within_limits(const JointVector& q) const {
    if (static_cast<std::size_t>(q.size()) != dof()) return false;
    for (std::size_t i = 0; i < dof(); ++i) {
      if (!(q[i] >= links_[i].lower && q[i] <= links_[i].upper)) return false;
    }
    return true;
  }

 private:
  std::vector<Link> links_;
  Pose3 base_mount_;
  double reach_ = 0.0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_double(std::uint64_t h, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  std::uint64_t s = h ^ bits;
  return splitmix64(s);
}

inline std::uint64_t hash_pose_and_seed(const Pose3& target, const JointVector& seed) {
  std::uint64_t h = 0x5EEDu;
  for (int i = 0; i < 3; ++i) h = hash_double(h, target.position()[i]);
  for (int i = 0; i < 4; ++i) h = hash_double(h, target.orientation().coeffs()[i]);
  for (Eigen::Index i = 0; i < seed.size(); ++i) h = hash_double(h, seed[i]);
  return h;
}

inline void require_length(const KinematicChain& chain, const JointVector& q) {
  if (static_cast<std::size_t>(q.size()) != chain.dof()) {
    throw std::invalid_argument("joint vector has length " + std::to_string(q.size()) +
                                ", chain has " + std::to_string(chain.dof()) + " joints");
  }
}
}  // namespace detail

/// Frame of every link after its joint rotation (before its offset), in the
/// base frame. Index i is the frame in which link i's body is described.
inline std::vector<Pose3> link_frames(const KinematicChain& chain, const JointVector& q) {
  detail::require_length(chain, q);
  std::vector<Pose3> frames;
  frames.reserve(chain.dof());
  Pose3 t = chain.base_mount();
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const Link& l = chain.links()[i];
    t = t * Pose3(Vec3::Zero(), Quat(Eigen::AngleAxisd(q[i], l.axis)));
    frames.push_back(t);
    t = t * l.offset;
  }
  return frames;
}

/// End-effector pose in the base frame.
inline Pose3 forward_kinematics(const KinematicChain& chain, const JointVector& q) {
  const auto frames = link_frames(chain, q);
  return frames.back() * chain.links().back().offset;
}

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Geometric Jacobian in the base frame, rows (linear; angular).
inline Jacobian geometric_jacobian(const KinematicChain& chain, const std::vector<Pose3>& frames,
                                   const Vec3& ee_position) {
  Jacobian jac(6, chain.dof());
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const Vec3 axis = frames[i].orientation() * chain.links()[i].axis;
    jac.block<3, 1>(0, i) = axis.cross(ee_position - frames[i].position());
    jac.block<3, 1>(3, i) = axis;
  }
  return jac;
}

struct IkOptions {
  double tol_pos = 1e-3;  // m
  double tol_rot = 1e-2;  // rad
  double damping = 1e-3;  // added to the diagonal of J J^T
  /// Per-update caps on the error twist handed to the solver.
  double max_linear_error = 0.2;
  double max_angular_error = 0.5;
  std::size_t max_iters = 100;
  /// Consecutive updates without a `stall_improvement` relative drop in error
  /// before the solver re-seeds from a deterministic pseudo-random
  /// configuration derived from (target, seed). 0 disables re-seeding.
  std::size_t stall_window = 2;
  double stall_improvement = 0.05;
};

enum class IkStatus { Converged, IterationBudgetExceeded };

struct IkResidual {
  double translation = 0.0;
  double rotation = 0.0;
};

struct IkResult {
  IkStatus status = IkStatus::IterationBudgetExceeded;
  JointVector joints;
  std::size_t iterations = 0;  // damped-least-squares updates performed
  IkResidual residual;

  bool converged() const { return status == IkStatus::Converged; }
};

/// Damped least squares on the 6-D pose error with per-iterate joint-limit
/// clamping. Targets farther from the mount than the chain's total reach are
/// rejected before any update is made.
inline IkResult solve_ik(const KinematicChain& chain, const Pose3& target, const JointVector& seed,
                         const IkOptions& opt = {}) {
  detail::require_length(chain, seed);
  if (!target.is_finite() || !seed.allFinite()) {
    throw std::invalid_argument("solve_ik: non-finite target or seed");
  }

  IkResult result;
  result.joints = chain.clamp(seed);

  const double root_distance =
      (target.position() - chain.base_mount().position()).norm();
  const bool geometrically_unreachable = root_distance > chain.total_reach() + opt.tol_pos;

  std::uint64_t restart_state = detail::hash_pose_and_seed(target, seed);
  double best_error = std::numeric_limits<double>::infinity();
  std::size_t since_improvement = 0;

  Eigen::Matrix<double, 6, 1> err;
  for (;;) {
    const auto frames = link_frames(chain, result.joints);
    const Pose3 ee = frames.back() * chain.links().back().offset;
    const Vec3 e_pos = target.position() - ee.position();
    const Vec3 e_rot = rotation_error(ee.orientation(), target.orientation());
    result.residual = {e_pos.norm(), e_rot.norm()};

    if (result.residual.translation <= opt.tol_pos && result.residual.rotation <= opt.tol_rot) {
      result.status = IkStatus::Converged;
      return result;
    }
    if (result.iterations >= opt.max_iters || geometrically_unreachable) {
      result.status = IkStatus::IterationBudgetExceeded;
      return result;
    }

    const double error = result.residual.translation + 0.1 * result.residual.rotation;
    if (error < (1.0 - opt.stall_improvement) * best_error) {
      best_error = error;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (opt.stall_window > 0 && since_improvement >= opt.stall_window) {
      for (std::size_t i = 0; i < chain.dof(); ++i) {
        const Link& l = chain.links()[i];
        const double u = static_cast<double>(detail::splitmix64(restart_state) >> 11) * 0x1.0p-53;
        result.joints[i] = l.lower + u * (l.upper - l.lower);
      }
      best_error = std::numeric_limits<double>::infinity();
      since_improvement = 0;
      continue;
    }

    const double lin_scale =
        result.residual.translation > opt.max_linear_error
            ? opt.max_linear_error / result.residual.translation
            : 1.0;
    const double ang_scale =
        result.residual.rotation > opt.max_angular_error
            ? opt.max_angular_error / result.residual.rotation
            : 1.0;
    err.head<3>() = lin_scale * e_pos;
    err.tail<3>() = ang_scale * e_rot;

    const Jacobian jac = geometric_jacobian(chain, frames, ee.position());
    Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose();
    jjt.diagonal().array() += opt.damping;
    const Eigen::VectorXd dq = jac.transpose() * jjt.ldlt().solve(err);
    result.joints = chain.clamp(result.joints + dq);
    ++result.iterations;
  }
}

/// Reference 6-DoF arm used by the generators and tests: yaw, shoulder pitch,
/// elbow pitch, wrist roll, wrist pitch, tool roll; 0.9 m of links mounted
/// 0.2 m above the base origin.
inline KinematicChain default_arm() {
  const double pi = std::numbers::pi;
  std::vector<Link> links = {
      {Pose3(Vec3(0.0, 0.0, 0.10)), Vec3::UnitZ(), -3.1, 3.1},
      {Pose3(Vec3(0.35, 0.0, 0.0)), Vec3::UnitY(), -2.27, 2.27},
      {Pose3(Vec3(0.30, 0.0, 0.0)), Vec3::UnitY(), -2.36, 2.36},
      {Pose3(Vec3(0.08, 0.0, 0.0)), Vec3::UnitX(), -3.1, 3.1},
      {Pose3(Vec3(0.0, 0.0, 0.0)), Vec3::UnitY(), -2.23, 2.23},
      {Pose3(Vec3(0.07, 0.0, 0.0)), Vec3::UnitX(), -2.0 * pi, 2.0 * pi},
  };
  return KinematicChain(std::move(links), Pose3(Vec3(0.0, 0.0, 0.2)));
}

/// Comfortable configuration of default_arm(): upper arm raised, forearm level.
inline JointVector default_ready_joints() {
  JointVector q(6);
  q << 0.0, -0.9, 1.3, 0.0, 0.6, 0.0;
  return q;
}

}  // namespace mmplan
