#pragma once

// Dense voxel ESDF sampled from the analytic scene distance, with trilinear
// queries.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmplan/scene.hpp"

namespace mmplan {

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(Vec3 origin, double resolution, std::array<std::size_t, 3> dims,
                std::vector<double> values)
      : origin_(origin), resolution_(resolution), dims_(dims), values_(std::move(values)) {
    if (!(resolution_ > 0.0)) throw std::invalid_argument("DistanceField: resolution must be > 0");
    if (values_.size() != dims_[0] * dims_[1] * dims_[2]) {
      throw std::invalid_argument("DistanceField: value count does not match dims");
    }
  }

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const std::array<std::size_t, 3>& dims() const { return dims_; }
  const std::vector<double>& values() const { return values_; }

  Vec3 node_position(std::size_t i, std::size_t j, std::size_t k) const {
    return origin_ + resolution_ * Vec3(static_cast<double>(i), static_cast<double>(j),
                                        static_cast<double>(k));
  }

  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[(k * dims_[1] + j) * dims_[0] + i];
  }

  /// Trilinear interpolation; points outside the grid are clamped onto it.
  /// Querying a node position returns the stored node value exactly.
  double query(const Vec3& p) const {
    std::array<std::size_t, 3> i0{};
    std::array<double, 3> t{};
    for (int a = 0; a < 3; ++a) {
      const double n = static_cast<double>(dims_[a] - 1);
      double f = std::clamp((p[a] - origin_[a]) / resolution_, 0.0, n);
      const double nearest = std::round(f);
      if (std::abs(f - nearest) < 1e-9) f = nearest;
      double base = std::floor(f);
      if (base >= n && dims_[a] > 1) base = n - 1.0;
      i0[a] = static_cast<std::size_t>(base);
      t[a] = f - base;
    }
    const auto idx = [&](std::size_t di, std::size_t dj, std::size_t dk) {
      const std::size_t i = std::min(i0[0] + di, dims_[0] - 1);
      const std::size_t j = std::min(i0[1] + dj, dims_[1] - 1);
      const std::size_t k = std::min(i0[2] + dk, dims_[2] - 1);
      return values_[(k * dims_[1] + j) * dims_[0] + i];
    };
    const auto lerp = [](double a, double b, double s) { return s == 0.0 ? a : (1.0 - s) * a + s * b; };
    const double c00 = lerp(idx(0, 0, 0), idx(1, 0, 0), t[0]);
    const double c10 = lerp(idx(0, 1, 0), idx(1, 1, 0), t[0]);
    const double c01 = lerp(idx(0, 0, 1), idx(1, 0, 1), t[0]);
    const double c11 = lerp(idx(0, 1, 1), idx(1, 1, 1), t[0]);
    const double c0 = lerp(c00, c10, t[1]);
    const double c1 = lerp(c01, c11, t[1]);
    return lerp(c0, c1, t[2]);
  }

 private:
  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 1.0;
  std::array<std::size_t, 3> dims_{1, 1, 1};
  std::vector<double> values_{kEmptySceneDistance};
};

struct FieldOptions {
  double resolution = 0.02;
  /// Padding added around the workspace on every side; at least 2 * epsilon0.
  double padding = 0.2;
  std::size_t max_voxels = std::size_t{1} << 24;
};

/// Samples analytic_distance at every node of a grid covering the padded
/// workspace. Node values are clamped to kEmptySceneDistance.
inline DistanceField build_field(const Scene& scene, const FieldOptions& opt = {}) {
  if (!(opt.resolution > 0.0) || !std::isfinite(opt.resolution)) {
    throw std::invalid_argument("build_field: resolution must be positive");
  }
  const Vec3 origin = scene.workspace.min.array() - opt.padding;
  const Vec3 extent = scene.workspace.extent().array() + 2.0 * opt.padding;
  std::array<std::size_t, 3> dims{};
  double total = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double cells = std::ceil(extent[a] / opt.resolution - 1e-9);
    dims[a] = static_cast<std::size_t>(std::max(cells, 1.0)) + 1;
    total *= static_cast<double>(dims[a]);
  }
  if (total > static_cast<double>(opt.max_voxels)) {
    throw CapacityError("build_field: grid of " + std::to_string(static_cast<long long>(total)) +
                        " voxels exceeds the budget of " + std::to_string(opt.max_voxels));
  }

  std::vector<double> values(dims[0] * dims[1] * dims[2]);
  std::size_t n = 0;
  for (std::size_t k = 0; k < dims[2]; ++k) {
    for (std::size_t j = 0; j < dims[1]; ++j) {
      for (std::size_t i = 0; i < dims[0]; ++i) {
        const Vec3 p = origin + opt.resolution * Vec3(static_cast<double>(i), static_cast<double>(j),
                                                      static_cast<double>(k));
        values[n++] = std::min(analytic_distance(scene, p), kEmptySceneDistance);
      }
    }
  }
  return DistanceField(origin, opt.resolution, dims, std::move(values));
}

inline double query(const DistanceField& field, const Vec3& p) { return field.query(p); }

}  // namespace mmplan
