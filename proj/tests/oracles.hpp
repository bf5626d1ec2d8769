#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mmplan/mmplan.hpp"

namespace oracle {

using Mat4 = Eigen::Matrix4d;

inline Mat4 homogeneous(const mmplan::Pose3& p) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = p.orientation().normalized().toRotationMatrix();
  m.topRightCorner<3, 1>() = p.position();
  return m;
}

// Rodrigues rotation about a unit axis, built without quaternions.
inline Mat4 axis_rotation(const Eigen::Vector3d& axis, double angle) {
  const Eigen::Vector3d k = axis.normalized();
  Eigen::Matrix3d K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = Eigen::Matrix3d::Identity() + std::sin(angle) * K + (1 - std::cos(angle)) * K * K;
  return m;
}

/// Per-joint transform product; returns the frame of each link after its joint.
inline std::vector<Mat4> chain_frames(const mmplan::KinematicChain& chain, const Eigen::VectorXd& q) {
  std::vector<Mat4> out;
  Mat4 t = homogeneous(chain.base_mount());
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const auto& l = chain.links()[i];
    t = t * axis_rotation(l.axis, q[static_cast<Eigen::Index>(i)]);
    out.push_back(t);
    t = t * homogeneous(l.offset);
  }
  return out;
}

inline Mat4 chain_fk(const mmplan::KinematicChain& chain, const Eigen::VectorXd& q) {
  return chain_frames(chain, q).back() * homogeneous(chain.links().back().offset);
}

inline Eigen::VectorXd random_joints(const mmplan::KinematicChain& chain, std::mt19937_64& rng) {
  Eigen::VectorXd q(static_cast<Eigen::Index>(chain.dof()));
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const auto& l = chain.links()[i];
    std::uniform_real_distribution<double> u(l.lower, l.upper);
    q[static_cast<Eigen::Index>(i)] = u(rng);
  }
  return q;
}

/// Brute-force expected-plus-top-k: full sort with index tie-break.
inline double upper_sum(std::vector<double> v, double alpha, std::size_t k) {
  double all = 0.0;
  for (double x : v) all += x;
  std::vector<std::pair<double, std::size_t>> idx;
  for (std::size_t i = 0; i < v.size(); ++i) idx.emplace_back(v[i], i);
  std::sort(idx.begin(), idx.end());
  double top = 0.0;
  for (std::size_t i = 0; i < k; ++i) top += idx[i].first;
  return all + alpha * top;
}

inline double rastrigin(const Eigen::VectorXd& x) {
  double f = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    f += x[i] * x[i] - 10.0 * std::cos(2.0 * std::numbers::pi * x[i]);
  }
  return f;
}

/// Polynomial test function with a hand-derived gradient.
struct Polynomial {
  double operator()(const Eigen::VectorXd& x) const {
    const double a = x[0], b = x[1], c = x[2];
    return 3 * a * a * a * b - 2 * b * b * c + c * c * c * c + a * c - 5 * b + 7;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    const double a = x[0], b = x[1], c = x[2];
    Eigen::VectorXd g(3);
    g << 9 * a * a * b + c, 3 * a * a * a - 4 * b * c - 5, -2 * b * b + 4 * c * c * c + a;
    return g;
  }
};

/// Five primitive scenes covering every shape type, used for field fidelity.
inline std::vector<mmplan::Scene> primitive_scenes() {
  using namespace mmplan;
  const AxisBox ws{Vec3(-1, -1, 0), Vec3(1, 1, 1.2)};
  std::vector<Scene> scenes;
  scenes.push_back({{{Sphere{Vec3(0.1, -0.2, 0.5), 0.3}}}, ws});
  scenes.push_back({{{AxisBox{Vec3(-0.4, -0.3, 0.0), Vec3(0.35, 0.25, 0.6)}}}, ws});
  scenes.push_back({{{Cylinder{Vec3(0.2, 0.1, 0.0), 0.25, 0.9}}}, ws});
  scenes.push_back({{{Sphere{Vec3(-0.5, 0.5, 0.8), 0.2}},
                     {AxisBox{Vec3(0.1, -0.9, 0.0), Vec3(0.9, -0.5, 0.4)}},
                     {Cylinder{Vec3(0.4, 0.5, 0.0), 0.1, 1.0}}},
                    ws});
  scenes.push_back({{{AxisBox{Vec3(-0.05, -1.0, 0.0), Vec3(0.05, -0.2, 1.2)}},
                     {AxisBox{Vec3(-0.05, 0.2, 0.0), Vec3(0.05, 1.0, 1.2)}},
                     {Sphere{Vec3(0.6, 0.0, 0.3), 0.15}, true}},
                    ws});
  return scenes;
}

}  // namespace oracle
