#pragma once

// Obstacle primitives and their exact signed distance.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mmplan/geometry.hpp"

namespace mmplan {

/// Distance reported when nothing is in the scene. Finite so cost arithmetic
/// never sees infinities.
inline constexpr double kEmptySceneDistance = 1e6;

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

struct AxisBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Upright cylinder: `base_center` is the center of the bottom cap.
struct Cylinder {
  Vec3 base_center = Vec3::Zero();
  double radius = 0.0;
  double height = 0.0;
};

using Shape = std::variant<Sphere, AxisBox, Cylinder>;

struct Obstacle {
  Shape shape;
  /// Target objects (the thing being grasped) are excluded from distances.
  bool is_target = false;
};

inline double signed_distance(const Sphere& s, const Vec3& p) {
  return (p - s.center).norm() - s.radius;
}

inline double signed_distance(const AxisBox& b, const Vec3& p) {
  const Vec3 q = (p - b.center()).cwiseAbs() - 0.5 * b.extent();
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

inline double signed_distance(const Cylinder& c, const Vec3& p) {
  const double radial = std::hypot(p.x() - c.base_center.x(), p.y() - c.base_center.y()) - c.radius;
  const double axial = std::abs(p.z() - (c.base_center.z() + 0.5 * c.height)) - 0.5 * c.height;
  const double outside = std::hypot(std::max(radial, 0.0), std::max(axial, 0.0));
  return outside + std::min(std::max(radial, axial), 0.0);
}

inline double signed_distance(const Shape& shape, const Vec3& p) {
  return std::visit([&](const auto& s) { return signed_distance(s, p); }, shape);
}

/// Axis-aligned bounds of a primitive.
inline AxisBox bounding_box(const Shape& shape) {
  struct Visitor {
    AxisBox operator()(const Sphere& s) const {
      return {s.center.array() - s.radius, s.center.array() + s.radius};
    }
    AxisBox operator()(const AxisBox& b) const { return b; }
    AxisBox operator()(const Cylinder& c) const {
      return {Vec3(c.base_center.x() - c.radius, c.base_center.y() - c.radius, c.base_center.z()),
              Vec3(c.base_center.x() + c.radius, c.base_center.y() + c.radius,
                   c.base_center.z() + c.height)};
    }
  };
  return std::visit(Visitor{}, shape);
}

struct Scene {
  std::vector<Obstacle> obstacles;
  AxisBox workspace;

  /// Throws std::invalid_argument when a primitive is degenerate or leaves the
  /// workspace.
  void validate() const {
    if (!((workspace.max.array() > workspace.min.array()).all())) {
      throw std::invalid_argument("Scene: workspace bounds are empty");
    }
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      const Shape& s = obstacles[i].shape;
      bool ok = true;
      if (const auto* sp = std::get_if<Sphere>(&s)) ok = sp->radius > 0.0;
      if (const auto* bx = std::get_if<AxisBox>(&s)) ok = (bx->max.array() > bx->min.array()).all();
      if (const auto* cy = std::get_if<Cylinder>(&s)) ok = cy->radius > 0.0 && cy->height > 0.0;
      if (!ok) {
        throw std::invalid_argument("Scene: obstacle " + std::to_string(i) +
                                    " has non-positive size");
      }
      const AxisBox bb = bounding_box(s);
      if (!workspace.contains(bb.min) || !workspace.contains(bb.max)) {
        throw std::invalid_argument("Scene: obstacle " + std::to_string(i) +
                                    " lies outside the workspace");
      }
    }
  }
};

/// Exact signed distance to the union of non-target obstacles.
inline double analytic_distance(const Scene& scene, const Vec3& p) {
  double d = kEmptySceneDistance;
  for (const Obstacle& o : scene.obstacles) {
    if (o.is_target) continue;
    d = std::min(d, signed_distance(o.shape, p));
  }
  return d;
}

}  // namespace mmplan
