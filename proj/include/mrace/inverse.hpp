#pragma once

// Inverse of the win (or last) probability map p -> pi(p) for fixed goals.
// Damped Newton in x_k = ln(p_k / p_1), k = 2..m, on the residual of players
// 2..m; the first component follows from both vectors summing to one.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrace/detail/sum.hpp"
#include "mrace/error.hpp"
#include "mrace/model.hpp"
#include "mrace/quad.hpp"

namespace mrace {

struct SolveResult {
  std::vector<double> probs;
  double residual_inf = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Thrown when Newton stalls or runs out of iterations; carries the best iterate.
class SolveError : public ConvergenceError {
 public:
  SolveError(const std::string& what, SolveResult best)
      : ConvergenceError(what), best_(std::move(best)) {}
  const SolveResult& best() const { return best_; }

 private:
  SolveResult best_;
};

struct SolveConfig {
  double tol = 1e-10;
  int max_iterations = 100;
  int max_halvings = 30;
  double fd_step = 1e-5;
  QuadConfig quad{};
  RaceKind map = RaceKind::Win;

  void validate() const {
    if (!(tol > 0.0) || max_iterations < 1 || max_halvings < 0 || !(fd_step > 0.0)) {
      throw ValidationError("SolveConfig: tol, fd_step > 0 and max_iterations >= 1 required");
    }
    quad.validate();
  }
};

struct M2Bounds {
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> exact;
};

/// Bracket for the first component of the two-player equal-probability vector.
inline M2Bounds equal_vector_m2_bounds(std::int64_t n1, std::int64_t n2) {
  if (n1 < 1 || n2 < 1) throw DomainError("equal_vector_m2_bounds: goals must be >= 1");
  if (n1 > n2) throw DomainError("equal_vector_m2_bounds: requires n1 <= n2");
  if (n1 == 1) {
    const double e = -std::expm1(-std::log(2.0) / static_cast<double>(n2));
    return {e, e, e};
  }
  const double a = static_cast<double>(n1);
  const double b = static_cast<double>(n2);
  return {(a - 1.0) / (a + b - 1.0), a / (a + b), std::nullopt};
}

namespace detail {

inline std::vector<double> probs_from_ratios(std::span<const double> x) {
  std::vector<double> p(x.size() + 1);
  const double top = std::max(0.0, *std::max_element(x.begin(), x.end()));
  p[0] = std::exp(-top);
  for (std::size_t k = 0; k < x.size(); ++k) p[k + 1] = std::exp(x[k] - top);
  const double total = compensated_sum(p);
  for (double& v : p) v /= total;
  return p;
}

inline std::vector<double> forward_map(std::span<const double> goals, std::span<const double> p,
                                       RaceKind kind, const QuadConfig& cfg) {
  const GameSpec g = game_from_goals_probs({goals.begin(), goals.end()}, {p.begin(), p.end()});
  return race_probs_quad(g, kind, cfg).values;
}

inline double inf_dist(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

inline void check_target(std::span<const double> target, std::size_t m) {
  if (target.size() != m) throw ValidationError("target length must match the number of goals");
  for (double t : target) {
    if (!std::isfinite(t) || !(t > 0.0) || !(t < 1.0)) {
      throw ValidationError("target probabilities must lie strictly inside (0, 1)");
    }
  }
  if (std::fabs(compensated_sum(target) - 1.0) > kNormalizeWarnTol) {
    throw ValidationError("target probabilities must sum to 1");
  }
}

inline bool all_equal(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double t) { return std::fabs(t - v[0]) <= 1e-15; });
}

inline std::vector<double> initial_probs(std::span<const double> goals,
                                         std::span<const double> target, RaceKind kind) {
  std::vector<double> p(goals.begin(), goals.end());
  if (goals.size() == 2 && kind == RaceKind::Win && all_equal(target) &&
      goals[0] == std::floor(goals[0]) && goals[1] == std::floor(goals[1])) {
    const bool swap = goals[0] > goals[1];
    const auto lo = static_cast<std::int64_t>(swap ? goals[1] : goals[0]);
    const auto hi = static_cast<std::int64_t>(swap ? goals[0] : goals[1]);
    const M2Bounds b = equal_vector_m2_bounds(lo, hi);
    const double first = b.exact ? *b.exact : 0.5 * (b.lower + b.upper);
    p = swap ? std::vector<double>{1.0 - first, first} : std::vector<double>{first, 1.0 - first};
  }
  const double total = compensated_sum(p);
  for (double& v : p) v /= total;
  return p;
}

}  // namespace detail

/// p on the simplex with map(p) = target, where map is the win (default) or
/// last probability vector evaluated by quadrature.
inline SolveResult solve_for_probs(std::span<const double> goals, std::span<const double> target,
                                   const SolveConfig& cfg = {}) {
  cfg.validate();
  detail::check_goals(goals);
  const std::size_t m = goals.size();
  detail::check_target(target, m);

  QuadConfig qcfg = cfg.quad;
  qcfg.abs_tol = std::max(std::min(qcfg.abs_tol, cfg.tol / 100.0), 1e-15);
  qcfg.rel_tol = std::max(std::min(qcfg.rel_tol, cfg.tol / 100.0), 1e-15);

  const std::size_t d = m - 1;
  auto residual = [&](std::span<const double> x, std::vector<double>& p) {
    p = detail::probs_from_ratios(x);
    return detail::forward_map(goals, p, cfg.map, qcfg);
  };

  const std::vector<double> p0 = detail::initial_probs(goals, target, cfg.map);
  std::vector<double> x(d);
  for (std::size_t k = 0; k < d; ++k) x[k] = std::log(p0[k + 1] / p0[0]);

  SolveResult best;
  std::vector<double> pi = residual(x, best.probs);
  best.residual_inf = detail::inf_dist(pi, target);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    best.iterations = it;
    if (best.residual_inf <= cfg.tol) {
      best.converged = true;
      return best;
    }
    Eigen::MatrixXd jac(d, d);
    Eigen::VectorXd rhs(d);
    for (std::size_t i = 0; i < d; ++i) rhs(i) = target[i + 1] - pi[i + 1];
    std::vector<double> scratch;
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> xp = x;
      std::vector<double> xm = x;
      xp[j] += cfg.fd_step;
      xm[j] -= cfg.fd_step;
      const std::vector<double> fp = residual(xp, scratch);
      const std::vector<double> fm = residual(xm, scratch);
      for (std::size_t i = 0; i < d; ++i) {
        jac(i, j) = (fp[i + 1] - fm[i + 1]) / (2.0 * cfg.fd_step);
      }
    }
    const Eigen::VectorXd step = jac.partialPivLu().solve(rhs);
    if (!step.allFinite()) throw SolveError("Newton step is not finite", best);

    bool improved = false;
    double lambda = 1.0;
    for (int h = 0; h <= cfg.max_halvings; ++h, lambda *= 0.5) {
      std::vector<double> xt = x;
      for (std::size_t k = 0; k < d; ++k) xt[k] += lambda * step(k);
      std::vector<double> pt;
      const std::vector<double> ft = residual(xt, pt);
      const double r = detail::inf_dist(ft, target);
      if (r < best.residual_inf) {
        x = std::move(xt);
        pi = ft;
        best.probs = std::move(pt);
        best.residual_inf = r;
        improved = true;
        break;
      }
    }
    if (!improved) {
      throw SolveError("Newton line search stalled at residual " +
                           std::to_string(best.residual_inf),
                       best);
    }
  }
  best.iterations = cfg.max_iterations;
  if (best.residual_inf <= cfg.tol) {
    best.converged = true;
    return best;
  }
  throw SolveError("Newton did not converge in " + std::to_string(cfg.max_iterations) +
                       " iterations",
                   best);
}

/// Advancing probabilities reproducing the target winning probabilities.
inline SolveResult winning_to_advancing(std::span<const double> goals,
                                        std::span<const double> target, double tol = 1e-10,
                                        const QuadConfig& qcfg = {}) {
  SolveConfig cfg;
  cfg.tol = tol;
  cfg.quad = qcfg;
  return solve_for_probs(goals, target, cfg);
}

/// The p making every winning probability 1/m.
inline SolveResult equal_probability_vector(std::span<const double> goals, double tol = 1e-10,
                                            const QuadConfig& qcfg = {}) {
  detail::check_goals(goals);
  const std::vector<double> target(goals.size(), 1.0 / static_cast<double>(goals.size()));
  return winning_to_advancing(goals, target, tol, qcfg);
}

}  // namespace mrace
