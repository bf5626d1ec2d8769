#pragma once

// Rigid-body poses, the planar mobile-base pose, and the base <-> world
// transform used to lift end-effector poses between frames.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mmplan {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

/// Rigid transform: translation in meters plus a unit quaternion.
///
/// The quaternion is normalized on construction and the double cover is
/// resolved by keeping w >= 0, so two equal rotations always have equal
/// coefficients.
class Pose3 {
 public:
  Pose3() : position_(Vec3::Zero()), orientation_(Quat::Identity()) {}

  Pose3(const Vec3& position, const Quat& orientation)
      : position_(position), orientation_(canonical(orientation)) {}

  explicit Pose3(const Vec3& position) : Pose3(position, Quat::Identity()) {}

  static Pose3 identity() { return Pose3(); }

  const Vec3& position() const { return position_; }
  const Quat& orientation() const { return orientation_; }
  Eigen::Matrix3d rotation() const { return orientation_.toRotationMatrix(); }

  bool is_finite() const {
    return position_.allFinite() && orientation_.coeffs().allFinite();
  }

  Pose3 operator*(const Pose3& rhs) const {
    return Pose3(position_ + orientation_ * rhs.position_,
                 orientation_ * rhs.orientation_);
  }

  Vec3 operator*(const Vec3& point) const {
    return position_ + orientation_ * point;
  }

  Pose3 inverse() const {
    const Quat inv = orientation_.conjugate();
    return Pose3(-(inv * position_), inv);
  }

  friend bool operator==(const Pose3& a, const Pose3& b) {
    return a.position_ == b.position_ &&
           a.orientation_.coeffs() == b.orientation_.coeffs();
  }

 private:
  static Quat canonical(Quat q) {
    const double n = q.norm();
    if (n > 0.0 && std::isfinite(n) && std::abs(n - 1.0) > 1e-14) q.coeffs() /= n;
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    return q;
  }

  Vec3 position_;
  Quat orientation_;
};

/// Planar base pose (x, y in meters, yaw in radians wrapped to (-pi, pi]).
class BasePose {
 public:
  BasePose() = default;
  BasePose(double x, double y, double yaw) : x_(x), y_(y), yaw_(wrap_angle(yaw)) {}

  double x() const { return x_; }
  double y() const { return y_; }
  double yaw() const { return yaw_; }

  bool is_finite() const {
    return std::isfinite(x_) && std::isfinite(y_) && std::isfinite(yaw_);
  }

  friend bool operator==(const BasePose&, const BasePose&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double yaw_ = 0.0;
};

/// Pure rotation about the world z axis.
inline Quat yaw_rotation(double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

inline Pose3 lift_to_pose3(const BasePose& base) {
  return Pose3(Vec3(base.x(), base.y(), 0.0), yaw_rotation(base.yaw()));
}

/// SE(2) composition: `b` expressed in the frame of `a`.
inline BasePose compose(const BasePose& a, const BasePose& b) {
  const double c = std::cos(a.yaw());
  const double s = std::sin(a.yaw());
  return BasePose(a.x() + c * b.x() - s * b.y(), a.y() + s * b.x() + c * b.y(),
                  a.yaw() + b.yaw());
}

namespace detail {
inline void require_finite(const BasePose& base, const Pose3& pose, const char* what) {
  if (!base.is_finite() || !pose.is_finite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite input");
  }
}
}  // namespace detail

/// End-effector pose expressed in the base frame -> world frame.
inline Pose3 gamma_to_world(const BasePose& base, const Pose3& ee_in_base) {
  detail::require_finite(base, ee_in_base, "gamma_to_world");
  return lift_to_pose3(base) * ee_in_base;
}

/// World-frame pose -> base frame. Exact inverse of gamma_to_world.
inline Pose3 gamma_to_base(const BasePose& base, const Pose3& ee_in_world) {
  detail::require_finite(base, ee_in_world, "gamma_to_base");
  return lift_to_pose3(base).inverse() * ee_in_world;
}

/// Geodesic angle of the relative rotation between two quaternions, in [0, pi].
inline double rotation_angle(const Quat& a, const Quat& b) {
  const Quat rel = a.conjugate() * b;
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

/// Rotation vector (axis * angle) of the shortest rotation taking `from` to `to`,
/// expressed in the world frame.
inline Vec3 rotation_error(const Quat& from, const Quat& to) {
  Quat rel = to * from.conjugate();
  if (rel.w() < 0.0) rel.coeffs() = -rel.coeffs();
  const double s = rel.vec().norm();
  if (s < 1e-15) return 2.0 * rel.vec();
  return (2.0 * std::atan2(s, rel.w()) / s) * rel.vec();
}

/// Quaternion from a rotation vector (axis * angle).
inline Quat exp_rotation(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-15) return Quat::Identity();
  return Quat(Eigen::AngleAxisd(angle, rotvec / angle));
}

struct PoseDelta {
  double translation = 0.0;  // meters
  double rotation = 0.0;     // radians in [0, pi]
};

inline PoseDelta pose_delta(const Pose3& a, const Pose3& b) {
  return {(b.position() - a.position()).norm(),
          rotation_angle(a.orientation(), b.orientation())};
}

/// Linear position interpolation and slerp orientation; s = 0 and s = 1 return
/// the endpoints exactly.
inline Pose3 interpolate(const Pose3& a, const Pose3& b, double s) {
  if (s <= 0.0) return a;
  if (s >= 1.0) return b;
  return Pose3(a.position() + s * (b.position() - a.position()),
               a.orientation().slerp(s, b.orientation()));
}

/// Base interpolation along the straight line, yaw along the shorter arc.
inline BasePose interpolate(const BasePose& a, const BasePose& b, double s) {
  if (s <= 0.0) return a;
  if (s >= 1.0) return b;
  return BasePose(a.x() + s * (b.x() - a.x()), a.y() + s * (b.y() - a.y()),
                  a.yaw() + s * wrap_angle(b.yaw() - a.yaw()));
}

}  // namespace mmplan
