#pragma once

// Dual annealing: generalized simulated annealing with a Tsallis visiting
// distribution, plus projected-gradient refinement of the incumbent.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace mmplan {

struct SearchSpace {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  SearchSpace() = default;
  SearchSpace(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {}

  std::size_t dimension() const { return static_cast<std::size_t>(lower.size()); }
  Eigen::VectorXd midpoint() const { return 0.5 * (lower + upper); }

  bool contains(const Eigen::VectorXd& x) const {
    return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
  }

  Eigen::VectorXd project(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }

  void validate() const {
    if (lower.size() < 1) throw std::invalid_argument("SearchSpace: dimension must be >= 1");
    if (lower.size() != upper.size()) {
      throw std::invalid_argument("SearchSpace: lower and upper differ in dimension");
    }
    if (!lower.allFinite() || !upper.allFinite() || !(lower.array() < upper.array()).all()) {
      throw std::invalid_argument("SearchSpace: bounds must be finite with lower < upper");
    }
  }
};

struct AnnealConfig {
  double initial_temp = 5230.0;
  double visit_param = 2.62;
  double accept_param = -5.0;
  std::size_t max_evals = 1000;
  double restart_temp_ratio = 2e-5;
  bool local_refine = true;
  std::size_t local_max_iters = 20;
  std::uint64_t rng_seed = 0;
  bool record_history = false;

  void validate(std::size_t dimension) const {
    if (!(initial_temp > 0.0)) throw std::invalid_argument("AnnealConfig: initial_temp must be > 0");
    if (!(visit_param > 1.0 && visit_param <= 3.0)) {
      throw std::invalid_argument("AnnealConfig: visit_param must lie in (1, 3]");
    }
    if (!(accept_param > -1e4 && accept_param < 1.0)) {
      throw std::invalid_argument("AnnealConfig: accept_param must lie in (-1e4, 1)");
    }
    if (!(restart_temp_ratio > 0.0 && restart_temp_ratio < 1.0)) {
      throw std::invalid_argument("AnnealConfig: restart_temp_ratio must lie in (0, 1)");
    }
    if (max_evals < dimension) throw std::invalid_argument("AnnealConfig: max_evals < dimension");
  }
};

struct OptResult {
  Eigen::VectorXd x_best;
  double f_best = std::numeric_limits<double>::infinity();
  std::size_t evals_used = 0;
  /// (evaluation index, value) for every evaluation, when recorded.
  std::vector<std::pair<std::size_t, double>> history;
};

namespace detail {

/// Counts evaluations, enforces the budget and remembers the best point seen.
template <class F>
class BudgetedObjective {
 public:
  BudgetedObjective(F& f, std::size_t max_evals, bool record)
      : f_(f), max_evals_(max_evals), record_(record) {}

  bool exhausted() const { return count_ >= max_evals_; }

  /// nullopt once the budget is spent.
  std::optional<double> operator()(const Eigen::VectorXd& x) {
    if (exhausted()) return std::nullopt;
    double v = static_cast<double>(f_(x));
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    if (record_) history_.emplace_back(count_, v);
    ++count_;
    if (v < best_f_ || best_x_.size() == 0) {
      best_f_ = v;
      best_x_ = x;
    }
    return v;
  }

  OptResult result() && {
    OptResult r;
    r.x_best = std::move(best_x_);
    r.f_best = best_f_;
    r.evals_used = count_;
    r.history = std::move(history_);
    return r;
  }

 private:
  F& f_;
  std::size_t max_evals_;
  bool record_;
  std::size_t count_ = 0;
  Eigen::VectorXd best_x_;
  double best_f_ = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, double>> history_;
};

inline double fd_step(double x) { return 1e-6 * (1.0 + std::abs(x)); }

/// Central differences, one-sided where a central stencil would leave the box.
template <class Eval>
std::optional<Eigen::VectorXd> fd_gradient(Eval& eval, const Eigen::VectorXd& x, double fx,
                                           const SearchSpace& space) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_step(x[i]);
    const bool can_up = x[i] + h <= space.upper[i];
    const bool can_down = x[i] - h >= space.lower[i];
    if (can_up && can_down) {
      probe[i] = x[i] + h;
      const auto fp = eval(probe);
      probe[i] = x[i] - h;
      const auto fm = eval(probe);
      if (!fp || !fm) return std::nullopt;
      g[i] = (*fp - *fm) / (2.0 * h);
    } else if (can_up) {
      probe[i] = x[i] + h;
      const auto fp = eval(probe);
      if (!fp) return std::nullopt;
      g[i] = (*fp - fx) / h;
    } else {
      probe[i] = x[i] - h;
      const auto fm = eval(probe);
      if (!fm) return std::nullopt;
      g[i] = (fx - *fm) / h;
    }
    probe[i] = x[i];
  }
  return g;
}

/// Spectral projected gradient with Armijo backtracking. Stops at a
/// stationary point, on a failed line search, or when the budget runs out.
template <class Eval>
std::pair<Eigen::VectorXd, double> refine(Eval& eval, Eigen::VectorXd x, double fx,
                                          const SearchSpace& space, std::size_t max_iters) {
  if (!std::isfinite(fx)) return {x, fx};
  auto g = fd_gradient(eval, x, fx, space);
  if (!g) return {x, fx};
  double step = 1.0 / std::max(1.0, g->cwiseAbs().maxCoeff());
  for (std::size_t it = 0; it < max_iters; ++it) {
    if ((space.project(x - *g) - x).cwiseAbs().maxCoeff() < 1e-12) break;
    bool accepted = false;
    Eigen::VectorXd xn;
    double fn = fx;
    double lam = step;
    for (int tries = 0; tries < 30; ++tries, lam *= 0.5) {
      xn = space.project(x - lam * *g);
      const Eigen::VectorXd d = xn - x;
      if (d.cwiseAbs().maxCoeff() < 1e-15) break;
      const auto f_try = eval(xn);
      if (!f_try) return {x, fx};
      if (*f_try <= fx + 1e-4 * g->dot(d) && *f_try < fx) {
        fn = *f_try;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const Eigen::VectorXd s = xn - x;
    x = std::move(xn);
    const double decrease = fx - fn;
    fx = fn;
    auto gn = fd_gradient(eval, x, fx, space);
    if (!gn) break;
    const Eigen::VectorXd y = *gn - *g;
    g = std::move(gn);
    const double sy = s.dot(y);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e10) : std::min(1e10, 2.0 * lam);
    if (decrease <= 1e-15 * (1.0 + std::abs(fx))) break;
  }
  return {x, fx};
}

/// Tsallis visiting distribution and wrap-around bounds handling.
class Visitor {
 public:
  Visitor(const SearchSpace& space, double qv, std::mt19937_64& rng)
      : space_(space), qv_(qv), rng_(rng), range_(space.upper - space.lower) {
    const double pi = std::numbers::pi;
    factor2_ = std::exp((4.0 - qv_) * std::log(qv_ - 1.0));
    factor3_ = std::exp((2.0 - qv_) * std::log(2.0) / (qv_ - 1.0));
    factor4p_ = std::sqrt(pi) * factor2_ / (factor3_ * (3.0 - qv_));
    factor5_ = 1.0 / (qv_ - 1.0) - 0.5;
    const double d1 = 2.0 - factor5_;
    factor6_ = pi * (1.0 - factor5_) / std::sin(pi * (1.0 - factor5_)) / std::exp(std::lgamma(d1));
  }

  /// Steps j < dim move every coordinate; later steps move coordinate j - dim.
  Eigen::VectorXd visit(const Eigen::VectorXd& x, std::size_t j, double temperature) {
    const auto dim = static_cast<std::size_t>(x.size());
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Eigen::VectorXd out = x;
    if (j < dim) {
      Eigen::VectorXd v = draw(temperature, x.size());
      const double upper_sample = uniform(rng_);
      const double lower_sample = uniform(rng_);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (v[i] > kTailLimit) v[i] = kTailLimit * upper_sample;
        else if (v[i] < -kTailLimit) v[i] = -kTailLimit * lower_sample;
        out[i] = wrap(x[i] + v[i], i);
      }
    } else {
      const auto i = static_cast<Eigen::Index>(j - dim);
      double v = draw(temperature, 1)[0];
      if (v > kTailLimit) v = kTailLimit * uniform(rng_);
      else if (v < -kTailLimit) v = -kTailLimit * uniform(rng_);
      out[i] = wrap(x[i] + v, i);
    }
    return out;
  }

 private:
  static constexpr double kTailLimit = 1e8;
  static constexpr double kMinVisitBound = 1e-10;

  Eigen::VectorXd draw(double temperature, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd a(n), b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a[i] = normal(rng_);
      b[i] = normal(rng_);
    }
    const double factor1 = std::exp(std::log(temperature) / (qv_ - 1.0));
    const double factor4 = factor4p_ * factor1;
    a *= std::exp(-(qv_ - 1.0) * std::log(factor6_ / factor4) / (3.0 - qv_));
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = std::exp((qv_ - 1.0) * std::log(std::abs(b[i])) / (3.0 - qv_));
      out[i] = a[i] / den;
    }
    return out;
  }

  double wrap(double v, Eigen::Index i) const {
    const double r = range_[i];
    const double a = v - space_.lower[i];
    double w = std::fmod(std::fmod(a, r) + r, r) + space_.lower[i];
    if (std::abs(w - space_.lower[i]) < kMinVisitBound) w += kMinVisitBound;
    return std::clamp(w, space_.lower[i], space_.upper[i]);
  }

  const SearchSpace& space_;
  double qv_;
  std::mt19937_64& rng_;
  Eigen::VectorXd range_;
  double factor2_, factor3_, factor4p_, factor5_, factor6_;
};

}  // namespace detail

/// Finite-difference gradient used by the local refinement, exposed for
/// testing: central differences with h = 1e-6 (1 + |x_i|), one-sided at bounds.
template <class F>
Eigen::VectorXd finite_difference_gradient(F&& objective, const Eigen::VectorXd& x,
                                           const SearchSpace& space) {
  auto eval = [&](const Eigen::VectorXd& p) -> std::optional<double> { return objective(p); };
  return *detail::fd_gradient(eval, x, objective(x), space);
}

/// Bound-constrained local refinement from x0; never returns a point worse
/// than x0.
template <class F>
OptResult local_refine(F&& objective, const Eigen::VectorXd& x0, const SearchSpace& space,
                       std::size_t max_iters,
                       std::size_t max_evals = std::numeric_limits<std::size_t>::max()) {
  space.validate();
  if (!space.contains(x0)) throw std::invalid_argument("local_refine: x0 outside the search space");
  detail::BudgetedObjective<std::remove_reference_t<F>> eval(objective, max_evals, false);
  const auto f0 = eval(x0);
  if (f0) detail::refine(eval, x0, *f0, space, max_iters);
  return std::move(eval).result();
}

/// Dual annealing over a box. The initial point defaults to the box midpoint
/// and is always evaluated first, so the result is never worse than it.
template <class F>
OptResult minimize(F&& objective, const SearchSpace& space, const AnnealConfig& cfg,
                   std::optional<Eigen::VectorXd> x0 = std::nullopt) {
  space.validate();
  cfg.validate(space.dimension());
  if (x0 && !space.contains(*x0)) throw std::invalid_argument("minimize: x0 outside the search space");

  using Fn = std::remove_reference_t<F>;
  detail::BudgetedObjective<Fn> eval(objective, cfg.max_evals, cfg.record_history);
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  detail::Visitor visitor(space, cfg.visit_param, rng);
  const std::size_t dim = space.dimension();

  Eigen::VectorXd current = x0 ? *x0 : space.midpoint();
  std::optional<double> fc = eval(current);
  if (!fc) return std::move(eval).result();
  double current_energy = *fc;
  Eigen::VectorXd best = current;
  double best_energy = current_energy;

  Eigen::VectorXd xmin = current;
  double emin = current_energy;
  std::size_t not_improved = 0;
  std::size_t not_improved_max = 1000;

  const double temp_restart = cfg.initial_temp * cfg.restart_temp_ratio;
  const double t1 = std::exp((cfg.visit_param - 1.0) * std::log(2.0)) - 1.0;

  while (!eval.exhausted()) {
    for (std::size_t step = 0; !eval.exhausted(); ++step) {
      const double s = static_cast<double>(step) + 2.0;
      const double t2 = std::exp((cfg.visit_param - 1.0) * std::log(s)) - 1.0;
      const double temperature = cfg.initial_temp * t1 / t2;
      if (temperature < temp_restart) {
        // Re-anneal from a random point; the incumbent is kept.
        for (Eigen::Index i = 0; i < current.size(); ++i) {
          current[i] = space.lower[i] + uniform(rng) * (space.upper[i] - space.lower[i]);
        }
        fc = eval(current);
        if (!fc) break;
        current_energy = *fc;
        if (current_energy < best_energy) {
          best_energy = current_energy;
          best = current;
        }
        break;
      }

      // Strategy chain.
      const double temp_step = temperature / static_cast<double>(step + 1);
      ++not_improved;
      bool improved = step == 0;
      if (improved) not_improved = 0;
      for (std::size_t j = 0; j < 2 * dim; ++j) {
        const Eigen::VectorXd candidate = visitor.visit(current, j, temperature);
        const auto e = eval(candidate);
        if (!e) break;
        if (*e < current_energy) {
          current = candidate;
          current_energy = *e;
          if (*e < best_energy) {
            best = candidate;
            best_energy = *e;
            improved = true;
            not_improved = 0;
          }
        } else {
          const double r = uniform(rng);
          const double pqv_temp =
              1.0 - (1.0 - cfg.accept_param) * (*e - current_energy) / temp_step;
          const double pqv =
              pqv_temp <= 0.0 ? 0.0 : std::exp(std::log(pqv_temp) / (1.0 - cfg.accept_param));
          if (r <= pqv) {
            current = candidate;
            current_energy = *e;
            xmin = current;
          }
          if (not_improved >= not_improved_max && (j == 0 || current_energy < emin)) {
            emin = current_energy;
            xmin = current;
          }
        }
      }
      if (eval.exhausted() || !cfg.local_refine) continue;

      // Local search on the incumbent after an improving chain, or on the
      // chain minimum after a long stall.
      if (improved) {
        auto [x, e] = detail::refine(eval, best, best_energy, space, cfg.local_max_iters);
        if (e < best_energy) {
          not_improved = 0;
          best = x;
          best_energy = e;
          current = x;
          current_energy = e;
        }
      }
      if (not_improved >= not_improved_max && !eval.exhausted()) {
        auto [x, e] = detail::refine(eval, xmin, emin, space, cfg.local_max_iters);
        xmin = x;
        emin = e;
        not_improved = 0;
        not_improved_max = dim;
        if (e < best_energy) {
          best = x;
          best_energy = e;
          current = x;
          current_energy = e;
        }
      }
    }
  }
  return std::move(eval).result();
}

}  // namespace mmplan
