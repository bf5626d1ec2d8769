#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mmplan/geometry.hpp"

using namespace mmplan;

namespace {

constexpr double kPi = std::numbers::pi;

Pose3 random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::normal_distribution<double> n(0.0, 1.0);
  return Pose3(Vec3(u(rng), u(rng), u(rng)), Quat(n(rng), n(rng), n(rng), n(rng)));
}

BasePose random_base(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  return BasePose(u(rng), u(rng), u(rng) * 2.0);
}

// Independent 4x4 homogeneous transform of a planar base.
Eigen::Matrix4d base_matrix(double x, double y, double yaw) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 0) = std::cos(yaw);
  m(0, 1) = -std::sin(yaw);
  m(1, 0) = std::sin(yaw);
  m(1, 1) = std::cos(yaw);
  m(0, 3) = x;
  m(1, 3) = y;
  return m;
}

}  // namespace

TEST(Geometry, GammaToWorldIdentityBase) {
  const Pose3 p = gamma_to_world(BasePose(0, 0, 0), Pose3(Vec3(0.4, 0, 0.3)));
  EXPECT_EQ(p, Pose3(Vec3(0.4, 0, 0.3)));
}

TEST(Geometry, GammaToWorldPureTranslation) {
  const Pose3 p = gamma_to_world(BasePose(1, 0, 0), Pose3(Vec3(0.5, 0, 0.3)));
  EXPECT_NEAR((p.position() - Vec3(1.5, 0, 0.3)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(rotation_angle(p.orientation(), Quat::Identity()), 0.0, 1e-15);
}

TEST(Geometry, GammaToWorldQuarterTurn) {
  const Pose3 p = gamma_to_world(BasePose(0, 0, kPi / 2), Pose3(Vec3(1, 0, 0)));
  EXPECT_NEAR((p.position() - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(rotation_angle(p.orientation(), yaw_rotation(kPi / 2)), 0.0, 1e-12);
}

TEST(Geometry, GammaToBaseExamples) {
  std::mt19937_64 rng(1);
  const Pose3 any = random_pose(rng);
  EXPECT_NEAR(pose_delta(gamma_to_base(BasePose(0, 0, 0), any), any).translation, 0.0, 1e-15);
  const Pose3 p = gamma_to_base(BasePose(1, 0, 0), Pose3(Vec3(1.5, 0, 0.3)));
  EXPECT_NEAR((p.position() - Vec3(0.5, 0, 0.3)).norm(), 0.0, 1e-15);
}

TEST(Geometry, GammaRoundTripRandom) {
  std::mt19937_64 rng(42);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const BasePose b = random_base(rng);
    const Pose3 p = random_pose(rng);
    const Pose3 r = gamma_to_world(b, gamma_to_base(b, p));
    worst = std::max(worst, (r.position() - p.position()).norm());
    worst = std::max(worst, (r.orientation().coeffs() - p.orientation().coeffs()).norm());
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Geometry, GammaMatchesMatrixOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const BasePose b = random_base(rng);
    const Pose3 p = random_pose(rng);
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = p.rotation();
    m.topRightCorner<3, 1>() = p.position();
    const Eigen::Matrix4d w = base_matrix(b.x(), b.y(), b.yaw()) * m;
    const Pose3 g = gamma_to_world(b, p);
    EXPECT_LT((g.position() - w.topRightCorner<3, 1>()).norm(), 1e-12);
    EXPECT_LT((g.rotation() - w.topLeftCorner<3, 3>()).norm(), 1e-12);
  }
}

TEST(Geometry, GammaIsLeftGroupAction) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const BasePose a = random_base(rng), b = random_base(rng);
    const Pose3 p = random_pose(rng);
    const Pose3 lhs = gamma_to_world(compose(a, b), p);
    const Pose3 rhs = gamma_to_world(a, gamma_to_world(b, p));
    EXPECT_LT((lhs.position() - rhs.position()).norm(), 1e-12);
    EXPECT_LT(rotation_angle(lhs.orientation(), rhs.orientation()), 1e-7);
  }
}

TEST(Geometry, NonFiniteInputsRejected) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(gamma_to_world(BasePose(nan, 0, 0), Pose3()), std::invalid_argument);
  EXPECT_THROW(gamma_to_base(BasePose(0, 0, 0), Pose3(Vec3(0, nan, 0))), std::invalid_argument);
  EXPECT_THROW(gamma_to_world(BasePose(0, 0, 0), Pose3(Vec3(0, 0, std::numeric_limits<double>::infinity()))),
               std::invalid_argument);
}

TEST(Geometry, QuaternionStaysUnitUnderComposition) {
  std::mt19937_64 rng(9);
  Pose3 acc;
  for (int i = 0; i < 10000; ++i) {
    acc = acc * random_pose(rng);
    ASSERT_NEAR(acc.orientation().norm(), 1.0, 1e-9);
    ASSERT_GE(acc.orientation().w(), 0.0);
  }
}

TEST(Geometry, CompositionIdentityAndAssociativity) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Pose3 a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    EXPECT_EQ(Pose3::identity() * a, a);
    const Pose3 l = (a * b) * c, r = a * (b * c);
    EXPECT_LT((l.position() - r.position()).norm(), 1e-12);
    EXPECT_LT(rotation_angle(l.orientation(), r.orientation()), 1e-7);
  }
}

TEST(Geometry, BasePoseYawWrapped) {
  EXPECT_NEAR(BasePose(0, 0, 3 * kPi / 2).yaw(), -kPi / 2, 1e-15);
  EXPECT_DOUBLE_EQ(BasePose(0, 0, -kPi).yaw(), kPi);
  EXPECT_DOUBLE_EQ(BasePose(0, 0, kPi).yaw(), kPi);
  const BasePose c = compose(BasePose(0, 0, 3.0), BasePose(0, 0, 3.0));
  EXPECT_GT(c.yaw(), -kPi);
  EXPECT_LE(c.yaw(), kPi);
  EXPECT_NEAR(c.yaw(), 6.0 - 2 * kPi, 1e-12);
}

TEST(Geometry, LiftIsPlanar) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const BasePose b = random_base(rng);
    const Pose3 p = lift_to_pose3(b);
    EXPECT_EQ(p.position().z(), 0.0);
    const Eigen::Matrix3d r = p.rotation();
    EXPECT_NEAR((r.col(2) - Vec3::UnitZ()).norm(), 0.0, 1e-12);
    EXPECT_NEAR(std::atan2(r(1, 0), r(0, 0)), b.yaw(), 1e-12);
  }
}

TEST(Geometry, PoseDeltaExamples) {
  const Pose3 a(Vec3(0.1, 0.2, 0.3), yaw_rotation(0.4));
  const PoseDelta same = pose_delta(a, a);
  EXPECT_EQ(same.translation, 0.0);
  EXPECT_EQ(same.rotation, 0.0);
  const PoseDelta t = pose_delta(Pose3(), Pose3(Vec3(0.3, 0, 0)));
  EXPECT_NEAR(t.translation, 0.3, 1e-15);
  EXPECT_EQ(t.rotation, 0.0);
  const PoseDelta r = pose_delta(Pose3(), Pose3(Vec3::Zero(), yaw_rotation(kPi / 2)));
  EXPECT_EQ(r.translation, 0.0);
  EXPECT_NEAR(r.rotation, kPi / 2, 1e-12);
}

TEST(Geometry, PoseDeltaSymmetricAndCoverInvariant) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    const Pose3 a = random_pose(rng), b = random_pose(rng);
    const PoseDelta ab = pose_delta(a, b), ba = pose_delta(b, a);
    EXPECT_NEAR(ab.translation, ba.translation, 1e-12);
    EXPECT_NEAR(ab.rotation, ba.rotation, 1e-12);
    EXPECT_GE(ab.rotation, 0.0);
    EXPECT_LE(ab.rotation, kPi + 1e-12);
  }
  const Quat q(0.3, -0.5, 0.2, 0.7);
  Quat neg = q.normalized();
  neg.coeffs() = -neg.coeffs();
  const PoseDelta d = pose_delta(Pose3(Vec3::Zero(), q), Pose3(Vec3::Zero(), neg));
  EXPECT_EQ(d.translation, 0.0);
  EXPECT_NEAR(d.rotation, 0.0, 1e-12);
}

TEST(Geometry, InterpolationEndpointsExact) {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 100; ++i) {
    const Pose3 a = random_pose(rng), b = random_pose(rng);
    EXPECT_EQ(interpolate(a, b, 0.0), a);
    EXPECT_EQ(interpolate(a, b, 1.0), b);
    const Pose3 m = interpolate(a, b, 0.5);
    EXPECT_LT((m.position() - 0.5 * (a.position() + b.position())).norm(), 1e-12);
    EXPECT_NEAR(rotation_angle(a.orientation(), m.orientation()),
                rotation_angle(m.orientation(), b.orientation()), 1e-9);
  }
}

TEST(Geometry, RotationErrorRecoversRotation) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const Pose3 a = random_pose(rng), b = random_pose(rng);
    const Quat back = exp_rotation(rotation_error(a.orientation(), b.orientation())) * a.orientation();
    EXPECT_LT(rotation_angle(back, b.orientation()), 1e-9);
  }
}
