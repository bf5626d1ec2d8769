#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace mmplan;

namespace {

SearchSpace box(Eigen::Index n, double lo, double hi) {
  return SearchSpace{Eigen::VectorXd::Constant(n, lo), Eigen::VectorXd::Constant(n, hi)};
}

Eigen::VectorXd random_start(const SearchSpace& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd x(s.lower.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = std::uniform_real_distribution<double>(s.lower[i], s.upper[i])(rng);
  }
  return x;
}

}  // namespace

TEST(Anneal, ConvexQuadratic) {
  auto f = [](const Eigen::VectorXd& x) { return (x[0] - 2.0) * (x[0] - 2.0); };
  AnnealConfig cfg;
  cfg.max_evals = 500;
  cfg.rng_seed = 1;
  const OptResult r = minimize(f, box(1, -10, 10), cfg);
  EXPECT_NEAR(r.x_best[0], 2.0, 1e-3);
  EXPECT_LE(r.evals_used, 500u);
}

TEST(Anneal, RastriginFromRandomStarts) {
  const SearchSpace s = box(2, -5.12, 5.12);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    AnnealConfig cfg;
    cfg.max_evals = 4000;
    cfg.rng_seed = seed;
    const OptResult r = minimize(oracle::rastrigin, s, cfg, random_start(s, 1000 + seed));
    EXPECT_LE(r.f_best, 1e-4) << "seed " << seed;
  }
}

TEST(Anneal, DeterministicForSeed) {
  const SearchSpace s = box(3, -5.12, 5.12);
  AnnealConfig cfg;
  cfg.max_evals = 800;
  cfg.rng_seed = 42;
  cfg.record_history = true;
  const OptResult a = minimize(oracle::rastrigin, s, cfg, random_start(s, 5));
  const OptResult b = minimize(oracle::rastrigin, s, cfg, random_start(s, 5));
  EXPECT_TRUE(a.x_best == b.x_best);
  EXPECT_EQ(a.f_best, b.f_best);
  EXPECT_EQ(a.evals_used, b.evals_used);
  EXPECT_EQ(a.history, b.history);
  cfg.rng_seed = 43;
  const OptResult c = minimize(oracle::rastrigin, s, cfg, random_start(s, 5));
  EXPECT_NE(a.history, c.history);
}

TEST(Anneal, BestIsMinimumOfEvaluatedAndInBounds) {
  const SearchSpace s = box(4, -2, 3);
  std::vector<double> seen;
  auto f = [&](const Eigen::VectorXd& x) {
    EXPECT_TRUE(s.contains(x));
    const double v = oracle::rastrigin(x);
    seen.push_back(v);
    return v;
  };
  AnnealConfig cfg;
  cfg.max_evals = 600;
  cfg.rng_seed = 3;
  cfg.record_history = true;
  const OptResult r = minimize(f, s, cfg, random_start(s, 8));
  ASSERT_FALSE(seen.empty());
  EXPECT_EQ(seen.size(), r.evals_used);
  EXPECT_LE(r.evals_used, cfg.max_evals);
  EXPECT_EQ(r.f_best, *std::min_element(seen.begin(), seen.end()));
  EXPECT_NEAR(oracle::rastrigin(r.x_best), r.f_best, 1e-12);
  EXPECT_TRUE(s.contains(r.x_best));
  EXPECT_LE(r.f_best, seen.front());
  ASSERT_EQ(r.history.size(), seen.size());
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(r.history[i].second, seen[i]);
}

TEST(Anneal, NeverWorseThanMidpoint) {
  const SearchSpace s = box(2, -3, 5);
  auto f = [](const Eigen::VectorXd& x) { return std::sin(3 * x[0]) + std::cos(2 * x[1]) + 0.1 * x.squaredNorm(); };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    AnnealConfig cfg;
    cfg.max_evals = 50;
    cfg.rng_seed = seed;
    EXPECT_LE(minimize(f, s, cfg).f_best, f(s.midpoint()));
  }
}

TEST(Anneal, LargeSentinelValuesTraversed) {
  const SearchSpace s = box(2, -4, 4);
  auto f = [](const Eigen::VectorXd& x) { return x[0] < 1.0 ? 1e5 : (x[0] - 2) * (x[0] - 2) + x[1] * x[1]; };
  AnnealConfig cfg;
  cfg.max_evals = 2000;
  cfg.rng_seed = 6;
  Eigen::VectorXd x0(2);
  x0 << -3, -3;
  const OptResult r = minimize(f, s, cfg, x0);
  EXPECT_LT(r.f_best, 1e-3);
}

TEST(Anneal, InvalidInputsRejected) {
  auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  AnnealConfig cfg;
  EXPECT_THROW(minimize(f, SearchSpace{Eigen::VectorXd::Ones(2), Eigen::VectorXd::Zero(2)}, cfg),
               std::invalid_argument);
  EXPECT_THROW(minimize(f, SearchSpace{Eigen::VectorXd(0), Eigen::VectorXd(0)}, cfg), std::invalid_argument);
  cfg.max_evals = 1;
  EXPECT_THROW(minimize(f, box(3, -1, 1), cfg), std::invalid_argument);
  cfg = {};
  cfg.visit_param = 3.5;
  EXPECT_THROW(minimize(f, box(1, -1, 1), cfg), std::invalid_argument);
  EXPECT_THROW(minimize(f, box(1, -1, 1), AnnealConfig{}, Eigen::VectorXd::Constant(1, 2.0)),
               std::invalid_argument);
}

TEST(LocalRefine, AtMinimizerStays) {
  auto f = [](const Eigen::VectorXd& x) { return (x[0] - 1) * (x[0] - 1) + 2 * (x[1] + 0.5) * (x[1] + 0.5); };
  Eigen::VectorXd x0(2);
  x0 << 1, -0.5;
  const OptResult r = local_refine(f, x0, box(2, -5, 5), 50);
  EXPECT_TRUE(r.x_best == x0);
  EXPECT_EQ(r.f_best, 0.0);
}

TEST(LocalRefine, QuadraticBowlConverges) {
  Eigen::Matrix3d A;
  A << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Eigen::Vector3d xs(0.3, -1.2, 2.1);
  auto f = [&](const Eigen::VectorXd& x) { return 0.5 * (x - xs).dot(A * (x - xs)); };
  const Eigen::Vector3d x0(-3, 3, -2);
  const OptResult r = local_refine(f, x0, box(3, -5, 5), 50);
  EXPECT_LT((r.x_best - xs).norm(), 1e-6);
  EXPECT_LE(r.f_best, f(x0));
}

TEST(LocalRefine, RespectsBounds) {
  auto f = [](const Eigen::VectorXd& x) { return (x[0] - 10) * (x[0] - 10) + x[1] * x[1]; };
  Eigen::VectorXd x0(2);
  x0 << 0, 1;
  const OptResult r = local_refine(f, x0, box(2, -1, 2), 50);
  EXPECT_NEAR(r.x_best[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x_best[1], 0.0, 1e-6);
}

TEST(LocalRefine, GradientMatchesAnalytic) {
  const oracle::Polynomial p;
  const SearchSpace s = box(3, -3, 3);
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x(3);
    x << u(rng), u(rng), u(rng);
    const Eigen::VectorXd g = finite_difference_gradient(p, x, s);
    const Eigen::VectorXd ref = p.gradient(x);
    EXPECT_LE((g - ref).norm() / std::max(1.0, ref.norm()), 1e-5);
  }
}

TEST(LocalRefine, OneSidedAtBounds) {
  const oracle::Polynomial p;
  const SearchSpace s = box(3, -1, 1);
  Eigen::VectorXd x(3);
  x << 1, -1, 0.5;
  const Eigen::VectorXd g = finite_difference_gradient(
      [&](const Eigen::VectorXd& y) {
        EXPECT_TRUE(s.contains(y));
        return p(y);
      },
      x, s);
  EXPECT_LE((g - p.gradient(x)).norm() / p.gradient(x).norm(), 1e-4);
}
