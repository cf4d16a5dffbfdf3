#pragma once

// One-dimensional quadrature for win and last probabilities with arbitrary
// (real) goals and probabilities:
//   pi_l  = int prod_{k != l} P(G_k > c_k x) Gamma(n_l, rate n_l)(dx)
//   tau_l = int prod_{k != l} P(G_k <= c_k x) Gamma(n_l, rate n_l)(dx)
// with c_k = p_k n_l / p_l (equal to n_k for canonical probabilities).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mrace/detail/sum.hpp"
#include "mrace/error.hpp"
#include "mrace/model.hpp"
#include "mrace/specfn.hpp"

namespace mrace {

struct QuadConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 200;
  double tail_cutoff_mass = 1e-16;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(tail_cutoff_mass > 0.0) ||
        !(tail_cutoff_mass < 1.0) || max_subdivisions < 1) {
      throw ValidationError("QuadConfig: tolerances must be positive and max_subdivisions >= 1");
    }
  }
};

struct QuadResult {
  double value = 0.0;
  double err_est = 0.0;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {a, b, kron * h, std::fabs((kron - gauss) * h)};
}

inline QuadResult totals(const std::vector<Panel>& panels) {
  CompensatedSum<double> v;
  CompensatedSum<double> e;
  for (const auto& p : panels) {
    v.add(p.value);
    e.add(p.err);
  }
  return {v.value(), e.value()};
}

// Bisection for the x with g(x) = target where g is monotone; `increasing`
// gives the direction. Searches [0, inf) starting from `guess`.
template <class G>
double monotone_solve(G g, double target, bool increasing, double guess) {
  double lo = 0.0;
  double hi = std::max(guess, 1.0);
  auto above = [&](double x) { return increasing ? g(x) >= target : g(x) <= target; };
  for (int i = 0; i < 2000 && !above(hi); ++i) hi *= 2.0;
  for (int i = 0; i < 2000 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (above(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

inline double gamma_log_density(double x, double shape, double rate) {
  return specfn::detail::log_gamma_prefix(shape, rate * x) - std::log(x);
}

}  // namespace detail

/// x with P(G <= x) = mass for G ~ Gamma(shape, 1).
inline double gamma_quantile_lower(double mass, double shape) {
  return detail::monotone_solve([shape](double x) { return specfn::gamma_cdf(x, shape); }, mass,
                                true, shape);
}

/// x with P(G > x) = mass for G ~ Gamma(shape, 1).
inline double gamma_quantile_upper(double mass, double shape) {
  return detail::monotone_solve([shape](double x) { return specfn::gamma_sf(x, shape); }, mass,
                                false, shape);
}

/// Adaptive Gauss-Kronrod 7/15 on [a, b], initially split at the breakpoints
/// that fall inside. Throws ConvergenceError when max_subdivisions bisections
/// do not bring the summed |K - G| estimate below the tolerance.
template <class F>
QuadResult integrate_interval(F f, double a, double b, const QuadConfig& cfg,
                              std::span<const double> breakpoints = {}) {
  cfg.validate();
  if (!(b > a)) return {0.0, 0.0};
  std::vector<double> cuts = {a};
  for (double x : breakpoints) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<detail::Panel> heap;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    heap.push_back(detail::gk15(f, cuts[i], cuts[i + 1]));
  }
  std::make_heap(heap.begin(), heap.end());
  for (int split = 0;; ++split) {
    const QuadResult r = detail::totals(heap);
    if (r.err_est <= std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(r.value))) return r;
    if (split >= cfg.max_subdivisions) {
      throw ConvergenceError("quadrature did not reach tolerance within " +
                             std::to_string(cfg.max_subdivisions) + " subdivisions");
    }
    std::pop_heap(heap.begin(), heap.end());
    const detail::Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw ConvergenceError("quadrature panel collapsed below double resolution");
    }
    heap.push_back(detail::gk15(f, worst.a, mid));
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(detail::gk15(f, mid, worst.b));
    std::push_heap(heap.begin(), heap.end());
  }
}

/// int_0^inf f(x) rate^shape x^(shape-1) e^(-rate x) / Gamma(shape) dx over the
/// central interval holding 1 - tail_cutoff_mass; the error estimate includes
/// the dropped mass (|f| <= 1 assumed).
template <class F>
QuadResult integrate_gamma_weighted(F f, double shape, double rate, const QuadConfig& cfg,
                                    std::span<const double> breakpoints = {}) {
  cfg.validate();
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw DomainError("integrate_gamma_weighted: shape and rate must be positive");
  }
  const double half = 0.5 * cfg.tail_cutoff_mass;
  const double lo = gamma_quantile_lower(half, shape) / rate;
  const double hi = gamma_quantile_upper(half, shape) / rate;
  std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
  if (shape > 1.0) cuts.push_back((shape - 1.0) / rate);
  auto g = [&](double x) {
    const double fx = f(x);
    return fx == 0.0 ? 0.0 : fx * std::exp(detail::gamma_log_density(x, shape, rate));
  };
  QuadResult r = integrate_interval(g, lo, hi, cfg, cuts);
  r.err_est += cfg.tail_cutoff_mass;
  return r;
}

namespace detail {

struct RaceIntegrand {
  std::vector<double> scale;   // c_k
  std::vector<double> shapes;  // n_k
  double lead_shape = 1.0;
};

inline RaceIntegrand race_integrand(const GameSpec& game, std::size_t player) {
  validate(game);
  check_player(game, player);
  RaceIntegrand r;
  r.lead_shape = game.goals[player];
  const bool canonical = game.is_canonical(1e-15);
  for (std::size_t k = 0; k < game.m(); ++k) {
    if (k == player) continue;
    r.shapes.push_back(game.goals[k]);
    r.scale.push_back(canonical ? game.goals[k]
                                : game.probs[k] * game.goals[player] / game.probs[player]);
  }
  return r;
}

inline QuadResult race_quad(const GameSpec& game, std::size_t player, RaceKind kind,
                            const QuadConfig& cfg) {
  const RaceIntegrand r = race_integrand(game, player);
  std::vector<double> breaks;
  for (std::size_t k = 0; k < r.shapes.size(); ++k) breaks.push_back(r.shapes[k] / r.scale[k]);
  auto f = [&r, kind](double x) {
    double prod = 1.0;
    for (std::size_t k = 0; k < r.shapes.size(); ++k) {
      const double y = r.scale[k] * x;
      prod *= kind == RaceKind::Win ? specfn::gamma_sf(y, r.shapes[k])
                                    : specfn::gamma_cdf(y, r.shapes[k]);
      if (prod < 1e-300) return 0.0;
    }
    return prod;
  };
  return integrate_gamma_weighted(f, r.lead_shape, r.lead_shape, cfg, breaks);
}

}  // namespace detail

inline QuadResult win_prob_quad_result(const GameSpec& game, std::size_t player,
                                       const QuadConfig& cfg = {}) {
  return detail::race_quad(game, player, RaceKind::Win, cfg);
}

inline QuadResult last_prob_quad_result(const GameSpec& game, std::size_t player,
                                        const QuadConfig& cfg = {}) {
  return detail::race_quad(game, player, RaceKind::Last, cfg);
}

inline double win_prob_quad(const GameSpec& game, std::size_t player, const QuadConfig& cfg = {}) {
  return win_prob_quad_result(game, player, cfg).value;
}

inline double last_prob_quad(const GameSpec& game, std::size_t player,
                             const QuadConfig& cfg = {}) {
  return last_prob_quad_result(game, player, cfg).value;
}

/// All players at once; error_bound is the largest per-player estimate.
inline RaceProbabilities race_probs_quad(const GameSpec& game, RaceKind kind,
                                         const QuadConfig& cfg = {}) {
  RaceProbabilities out{kind, {}, Method::Quad, 0.0};
  for (std::size_t l = 0; l < game.m(); ++l) {
    const QuadResult r = detail::race_quad(game, l, kind, cfg);
    out.values.push_back(r.value);
    out.error_bound = std::max(out.error_bound, r.err_est);
  }
  return out;
}

}  // namespace mrace
