#pragma once

// Collision query points on the robot surface: sampling on per-body bounding
// volumes and placement in the world frame for a given whole-body state.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "mmplan/kinematics.hpp"
#include "mmplan/scene.hpp"

namespace mmplan {

struct LinkPoint {
  std::size_t link_index = 0;
  Vec3 offset_in_link = Vec3::Zero();
};

struct QueryPointSet {
  std::vector<LinkPoint> link_points;
  std::vector<Vec3> base_points;

  std::size_t size() const { return link_points.size() + base_points.size(); }
};

/// Bounding volume of one robot body, used for area-proportional sampling.
struct BodyVolume {
  enum class Kind { BaseBox, LinkCylinder } kind = Kind::BaseBox;
  std::size_t link_index = 0;  // LinkCylinder only
  AxisBox box;                 // BaseBox only
  Vec3 axis_end = Vec3::Zero();  // LinkCylinder: segment from the link origin to here
  double radius = 0.0;

  double area() const {
    if (kind == Kind::BaseBox) {
      const Vec3 e = box.extent();
      return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.z() * e.x());
    }
    const double len = axis_end.norm();
    return 2.0 * std::numbers::pi * radius * (len + radius);
  }
};

/// The base box first, then one cylinder for every link of nonzero length.
inline std::vector<BodyVolume> robot_bodies(const KinematicChain& chain, const AxisBox& base_geometry,
                                            double link_radius) {
  std::vector<BodyVolume> bodies;
  BodyVolume base;
  base.kind = BodyVolume::Kind::BaseBox;
  base.box = base_geometry;
  bodies.push_back(base);
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const Vec3 seg = chain.links()[i].offset.position();
    if (seg.norm() <= 1e-12) continue;
    BodyVolume b;
    b.kind = BodyVolume::Kind::LinkCylinder;
    b.link_index = i;
    b.axis_end = seg;
    b.radius = link_radius;
    bodies.push_back(b);
  }
  return bodies;
}

/// Largest-remainder apportionment of n points over the given areas. Ties go
/// to the lower index.
inline std::vector<std::size_t> allocate_by_area(const std::vector<double>& areas, std::size_t n) {
  double total = 0.0;
  for (double a : areas) total += a;
  std::vector<std::size_t> counts(areas.size(), 0);
  std::vector<double> remainder(areas.size(), 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    const double quota = static_cast<double>(n) * areas[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainder[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(areas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % order.size()]];
  return counts;
}

namespace detail {

inline Vec3 sample_box_surface(const AxisBox& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vec3 e = box.extent();
  const double faces[3] = {e.y() * e.z(), e.x() * e.z(), e.x() * e.y()};  // normal along x, y, z
  const double pick = u(rng) * (faces[0] + faces[1] + faces[2]);
  const int axis = pick < faces[0] ? 0 : (pick < faces[0] + faces[1] ? 1 : 2);
  Vec3 p(box.min.x() + u(rng) * e.x(), box.min.y() + u(rng) * e.y(), box.min.z() + u(rng) * e.z());
  p[axis] = u(rng) < 0.5 ? box.min[axis] : box.max[axis];
  return p;
}

inline Vec3 sample_cylinder_surface(const Vec3& axis_end, double r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double len = axis_end.norm();
  const Vec3 dir = axis_end / len;
  const Vec3 helper = std::abs(dir.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = dir.cross(helper).normalized();
  const Vec3 e2 = dir.cross(e1);
  const double lateral = 2.0 * std::numbers::pi * r * len;
  const double cap = std::numbers::pi * r * r;
  const double pick = u(rng) * (lateral + 2.0 * cap);
  const double phi = 2.0 * std::numbers::pi * u(rng);
  const Vec3 radial = std::cos(phi) * e1 + std::sin(phi) * e2;
  if (pick < lateral) return u(rng) * axis_end + r * radial;
  const double rho = r * std::sqrt(u(rng));
  const Vec3 center = pick < lateral + cap ? Vec3::Zero() : axis_end;
  return center + rho * radial;
}

}  // namespace detail

/// Samples n_q points uniformly on the surfaces of the robot's body volumes,
/// apportioned by surface area. Deterministic for a given seed.
inline QueryPointSet sample_query_points(const KinematicChain& chain, const AxisBox& base_geometry,
                                         std::size_t n_q, std::uint64_t seed,
                                         double link_radius = 0.04) {
  if (n_q < 1) throw std::invalid_argument("sample_query_points: n_q must be >= 1");
  const auto bodies = robot_bodies(chain, base_geometry, link_radius);
  std::vector<double> areas;
  for (const auto& b : bodies) areas.push_back(b.area());
  const auto counts = allocate_by_area(areas, n_q);

  std::mt19937_64 rng(seed);
  QueryPointSet qps;
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    for (std::size_t k = 0; k < counts[b]; ++k) {
      if (bodies[b].kind == BodyVolume::Kind::BaseBox) {
        qps.base_points.push_back(detail::sample_box_surface(bodies[b].box, rng));
      } else {
        qps.link_points.push_back(
            {bodies[b].link_index,
             detail::sample_cylinder_surface(bodies[b].axis_end, bodies[b].radius, rng)});
      }
    }
  }
  return qps;
}

/// World-frame positions of every query point for the given base pose and
/// joint configuration, link points first.
inline std::vector<Vec3> materialize_points(const QueryPointSet& qps, const BasePose& base,
                                            const JointVector& joints, const KinematicChain& chain) {
  const Pose3 world_from_base = lift_to_pose3(base);
  const auto frames = link_frames(chain, joints);
  std::vector<Vec3> out;
  out.reserve(qps.size());
  for (const LinkPoint& lp : qps.link_points) {
    out.push_back(world_from_base * (frames.at(lp.link_index) * lp.offset_in_link));
  }
  for (const Vec3& bp : qps.base_points) out.push_back(world_from_base * bp);
  return out;
}

}  // namespace mmplan
