#pragma once

// Limits of win and last probabilities as goals grow.
//   n1 -> inf:   player 1 finishes at time ~1; the others need G_k <= n_k.
//   nm -> inf:   integrals over the inverted Dirichlet law of the head ratios.
//   proportional: n_k = alpha_k N, N -> inf; normal-integral limits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mrace/detail/sum.hpp"
#include "mrace/error.hpp"
#include "mrace/quad.hpp"
#include "mrace/sample.hpp"
#include "mrace/specfn.hpp"

namespace mrace {

struct ProportionVector {
  std::vector<double> alphas;

  std::size_t m() const { return alphas.size(); }

  void validate() const {
    if (alphas.size() < 2) throw DomainError("proportion vector needs at least two entries");
    for (double a : alphas) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw DomainError("proportions must be positive and finite");
      }
    }
  }
};

/// A limit value; `stderr_est` is the Monte Carlo standard error when
/// `monte_carlo` is set and the quadrature error estimate otherwise.
struct LimitValue {
  double value = 0.0;
  double stderr_est = 0.0;
  bool monte_carlo = false;
};

struct AsymConfig {
  QuadConfig quad{};
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t seed = 1;
  std::int64_t chunk_size = 65536;

  void validate() const {
    quad.validate();
    if (mc_samples < 2 || chunk_size < 1) {
      throw ValidationError("AsymConfig: mc_samples >= 2 and chunk_size >= 1 required");
    }
  }
};

namespace detail {

inline void check_limit_goals(std::span<const double> goals, std::size_t min_size,
                              const char* what) {
  if (goals.size() < min_size) {
    throw DomainError(std::string(what) + ": need at least " + std::to_string(min_size) +
                      " goals");
  }
  for (double n : goals) {
    if (!(n >= 1.0) || !std::isfinite(n)) {
      throw DomainError(std::string(what) + ": goals must be finite and >= 1");
    }
  }
}

inline double beta_density(double t, double a, double b) {
  if (!(t > 0.0) || !(t < 1.0)) return 0.0;
  return std::exp(specfn::detail::log_beta_prefix(t, 1.0 - t, a, b)) / (t * (1.0 - t));
}

// m = 3: with t = G1 / (G1 + G2) ~ Beta(n1, n2) the ratio s2 = 1/t - 1, so
// s2 > n2/n1 iff t < n1/(n1 + n2).
inline LimitValue nm_limit_three(double n1, double n2, bool win, const QuadConfig& cfg) {
  const double shape = n1 + n2;
  const double cut = n1 / shape;
  auto f = [=](double t) {
    const double w = beta_density(t, n1, n2);
    if (w == 0.0) return 0.0;
    const double x = n1 / t;
    return w * (win ? specfn::gamma_cdf(x, shape) : specfn::gamma_sf(x, shape));
  };
  std::vector<double> brk;
  if (n1 > 1.0 && n2 > 1.0) brk.push_back((n1 - 1.0) / (shape - 2.0));
  const QuadResult r =
      win ? integrate_interval(f, 0.0, cut, cfg, brk) : integrate_interval(f, cut, 1.0, cfg, brk);
  return {r.value, r.err_est, false};
}

inline LimitValue nm_limit_mc(std::span<const double> head, bool win, const AsymConfig& cfg) {
  IDParams id;
  id.denom_shape = head[0];
  id.numer_shapes.assign(head.begin() + 1, head.end());
  double shape = 0.0;
  for (double n : head) shape += n;
  const double n1 = head[0];

  CompensatedSum<double> sum;
  CompensatedSum<double> sumsq;
  std::int64_t done = 0;
  for (std::uint64_t chunk = 0; done < cfg.mc_samples; ++chunk) {
    Sampler s(cfg.seed, chunk);
    const std::int64_t count = std::min(cfg.chunk_size, cfg.mc_samples - done);
    for (std::int64_t i = 0; i < count; ++i) {
      const std::vector<double> x = sample_inverted_dirichlet(id, s);
      bool inside = true;
      double total = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        const bool above = x[k] > head[k + 1] / n1;
        if (above != win) inside = false;
        total += x[k];
      }
      double v = 0.0;
      if (inside) {
        const double y = n1 * (1.0 + total);
        v = win ? specfn::gamma_cdf(y, shape) : specfn::gamma_sf(y, shape);
      }
      sum.add(v);
      sumsq.add(v * v);
    }
    done += count;
  }
  const double n = static_cast<double>(done);
  const double mean = sum.value() / n;
  const double var = std::max(0.0, (sumsq.value() / n - mean * mean) * n / (n - 1.0));
  return {mean, std::sqrt(var / n), true};
}

inline LimitValue nm_limit(std::span<const double> head, bool win, const AsymConfig& cfg) {
  cfg.validate();
  check_limit_goals(head, 1, "nm limit");
  if (head.size() == 1) {
    const double n1 = head[0];
    return {win ? specfn::gamma_cdf(n1, n1) : specfn::gamma_sf(n1, n1), 0.0, false};
  }
  if (head.size() == 2) return nm_limit_three(head[0], head[1], win, cfg.quad);
  return nm_limit_mc(head, win, cfg);
}

inline double normal_cut(double tail_mass) {
  return monotone_solve([](double z) { return specfn::std_normal_cdf(-z); }, 0.5 * tail_mass,
                        false, 8.0);
}

inline QuadResult proportional_limit(const ProportionVector& props, bool win,
                                     const QuadConfig& cfg) {
  props.validate();
  cfg.validate();
  std::vector<double> ratio;
  for (std::size_t k = 1; k < props.m(); ++k) {
    ratio.push_back(std::sqrt(props.alphas[k] / props.alphas[0]));
  }
  auto f = [&ratio, win](double z) {
    double prod = specfn::std_normal_pdf(z);
    for (double r : ratio) {
      prod *= specfn::std_normal_cdf(win ? -r * z : r * z);
      if (prod < 1e-300) return 0.0;
    }
    return prod;
  };
  const double z = normal_cut(cfg.tail_cutoff_mass);
  const std::vector<double> brk = {0.0};
  QuadResult r = integrate_interval(f, -z, z, cfg, brk);
  r.err_est += cfg.tail_cutoff_mass;
  return r;
}

}  // namespace detail

/// prod_{k>=2} P(G_k > n_k) with G_k ~ Gamma(n_k, 1).
inline double limit_win_n1_inf(std::span<const double> tail_goals) {
  detail::check_limit_goals(tail_goals, 1, "limit_win_n1_inf");
  double prod = 1.0;
  for (double n : tail_goals) prod *= specfn::gamma_sf(n, n);
  return prod;
}

/// prod_{k>=2} P(G_k <= n_k).
inline double limit_last_n1_inf(std::span<const double> tail_goals) {
  detail::check_limit_goals(tail_goals, 1, "limit_last_n1_inf");
  double prod = 1.0;
  for (double n : tail_goals) prod *= specfn::gamma_cdf(n, n);
  return prod;
}

/// Head goals are n_1..n_{m-1}. Exact for m = 2, quadrature for m = 3 and
/// Monte Carlo for m >= 4.
inline LimitValue limit_win_nm_inf(std::span<const double> head_goals,
                                   const AsymConfig& cfg = {}) {
  return detail::nm_limit(head_goals, true, cfg);
}

inline LimitValue limit_last_nm_inf(std::span<const double> head_goals,
                                    const AsymConfig& cfg = {}) {
  return detail::nm_limit(head_goals, false, cfg);
}

/// int prod_{k>=2} (1 - Phi(sqrt(alpha_k/alpha_1) z)) phi(z) dz
inline double limit_win_proportional(const ProportionVector& props, const QuadConfig& cfg = {}) {
  return detail::proportional_limit(props, true, cfg).value;
}

/// int prod_{k>=2} Phi(sqrt(alpha_k/alpha_1) z) phi(z) dz
inline double limit_last_proportional(const ProportionVector& props, const QuadConfig& cfg = {}) {
  return detail::proportional_limit(props, false, cfg).value;
}

/// 2^(1 - ell).
inline double iterated_limit_win(std::int64_t ell) {
  if (ell < 1) throw DomainError("iterated_limit_win: ell must be >= 1");
  return std::ldexp(1.0, static_cast<int>(1 - std::min<std::int64_t>(ell, 2000)));
}

}  // namespace mrace
