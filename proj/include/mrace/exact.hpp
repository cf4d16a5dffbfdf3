#pragma once

// Exact win and last probabilities for integer goals: lattice dynamic
// programming, negative multinomial sums, the two-player and
// sum-of-incomplete-beta formulas, and inclusion-exclusion for last place.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mrace/detail/sum.hpp"
#include "mrace/error.hpp"
#include "mrace/model.hpp"
#include "mrace/specfn.hpp"

namespace mrace {

struct ExactSettings {
  std::uint64_t state_budget = 100'000'000;
  std::uint64_t term_budget = 10'000'000;
};

/// Parameters (n1; p_2..p_m) of a negative multinomial law. p_1 = 1 - sum(tail_probs).
struct NegMultinomialParams {
  std::int64_t n1 = 1;
  std::vector<double> tail_probs;

  double lead_prob() const { return 1.0 - detail::compensated_sum(tail_probs); }
};

namespace detail {

// Product of the entries as a double; saturates instead of overflowing.
inline double product_count(std::span<const std::int64_t> v, std::int64_t offset = 0) {
  double c = 1.0;
  for (auto x : v) c *= static_cast<double>(x + offset);
  return c;
}

inline void check_budget(double count, std::uint64_t budget, const char* what) {
  if (count > static_cast<double>(budget)) {
    throw BudgetError(std::string(what) + " count " + std::to_string(count) +
                      " exceeds the budget of " + std::to_string(budget));
  }
}

inline std::vector<double> log_factorials(std::int64_t n) {
  std::vector<double> t(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t i = 2; i <= n; ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
  return t;
}

// P(A_j <= limits_j - 1 for all j) where (A_j) is negative multinomial with n1
// lead successes, lead probability exp(log_lead) and per-coordinate
// probabilities exp(log_tail[j]). Terms summed in log space.
inline double negmulti_rectangle(std::int64_t n1, double log_lead,
                                 std::span<const double> log_tail,
                                 std::span<const std::int64_t> limits) {
  const std::size_t d = limits.size();
  const double base = static_cast<double>(n1) * log_lead;
  if (d == 0) return std::exp(base);
  std::int64_t kmax = n1 - 1;
  for (auto l : limits) kmax += l - 1;
  const auto lnfact = log_factorials(kmax);
  const double head = -lnfact[n1 - 1] + base;

  // contrib[j][k] = k ln p_j - ln k!
  std::vector<std::vector<double>> contrib(d);
  for (std::size_t j = 0; j < d; ++j) {
    contrib[j].resize(limits[j]);
    for (std::int64_t k = 0; k < limits[j]; ++k) {
      contrib[j][k] = static_cast<double>(k) * log_tail[j] - lnfact[k];
    }
  }
  // Odometer over digits 1..d-1; digit 0 is the inner loop.
  std::vector<std::int64_t> k(d, 0);
  std::vector<double> partial(d + 1, 0.0);   // partial[j] = sum_{i>=j} contrib
  std::vector<std::int64_t> ksum(d + 1, 0);  // ksum[j] = sum_{i>=j} k_i
  for (std::size_t j = d; j-- > 1;) {
    partial[j] = partial[j + 1] + contrib[j][0];
    ksum[j] = ksum[j + 1];
  }
  CompensatedSum<double> acc;
  while (true) {
    const double outer = head + partial[1];
    const std::int64_t kout = n1 - 1 + ksum[1];
    for (std::int64_t k0 = 0; k0 < limits[0]; ++k0) {
      acc.add(std::exp(outer + lnfact[kout + k0] + contrib[0][k0]));
    }
    std::size_t j = 1;
    while (j < d && ++k[j] == limits[j]) {
      k[j] = 0;
      ++j;
    }
    if (j >= d) break;
    for (std::size_t i = j + 1; i-- > 1;) {
      partial[i] = partial[i + 1] + contrib[i][k[i]];
      ksum[i] = ksum[i + 1] + k[i];
    }
  }
  return acc.value();
}

inline std::vector<std::size_t> others_of(std::size_t m, std::size_t player) {
  std::vector<std::size_t> o;
  for (std::size_t i = 0; i < m; ++i) {
    if (i != player) o.push_back(i);
  }
  return o;
}

}  // namespace detail

/// P(A_k < n_k for all k) for (A_2..A_m) ~ NegMultinomial(n1; p_2..p_m).
inline double negmulti_rectangle_prob(const NegMultinomialParams& params,
                                      std::span<const std::int64_t> limits,
                                      const ExactSettings& settings = {}) {
  if (params.n1 < 1) throw DomainError("n1 must be >= 1");
  if (limits.size() != params.tail_probs.size()) {
    throw DomainError("one limit per tail probability is required");
  }
  std::vector<double> log_tail;
  for (double p : params.tail_probs) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("tail probabilities must lie in (0,1)");
    log_tail.push_back(std::log(p));
  }
  const double lead = params.lead_prob();
  if (!(lead > 0.0)) throw DomainError("tail probabilities must sum to less than 1");
  for (auto l : limits) {
    if (l < 1) throw DomainError("limits must be >= 1");
  }
  detail::check_budget(detail::product_count(limits), settings.term_budget, "sum term");
  return detail::negmulti_rectangle(params.n1, std::log(lead), log_tail, limits);
}

/// Winning probabilities by a forward sweep over the open lattice
/// {xi : xi_l < n_l}. States are visited in mixed-radix index order, which is
/// a topological order because every move increases the index.
template <class Real>
std::vector<Real> win_probs_dp_values(std::span<const std::int64_t> goals,
                                      std::span<const Real> probs,
                                      const ExactSettings& settings = {}) {
  const std::size_t m = goals.size();
  detail::check_budget(detail::product_count(goals), settings.state_budget, "state");
  std::vector<std::size_t> stride(m);
  std::size_t states = 1;
  for (std::size_t l = 0; l < m; ++l) {
    stride[l] = states;
    states *= static_cast<std::size_t>(goals[l]);
  }
  std::vector<Real> mass(states, Real(0));
  mass[0] = Real(1);
  std::vector<detail::CompensatedSum<Real>> absorbed(m);
  std::vector<std::int64_t> xi(m, 0);
  for (std::size_t idx = 0; idx < states; ++idx) {
    const Real w = mass[idx];
    if (w != Real(0)) {
      for (std::size_t l = 0; l < m; ++l) {
        if (xi[l] + 1 < goals[l]) {
          mass[idx + stride[l]] += w * probs[l];
        } else {
          absorbed[l].add(w * probs[l]);
        }
      }
    }
    for (std::size_t l = 0; l < m && ++xi[l] == goals[l]; ++l) xi[l] = 0;
  }
  std::vector<Real> out(m);
  for (std::size_t l = 0; l < m; ++l) out[l] = absorbed[l].value();
  return out;
}

/// Last-place probabilities on the capped lattice {xi : xi_l <= n_l}. Moves
/// of finished players are renormalized away; a state with a single
/// unfinished player passes its whole mass to that player's tau.
template <class Real>
std::vector<Real> last_probs_dp_values(std::span<const std::int64_t> goals,
                                       std::span<const Real> probs,
                                       const ExactSettings& settings = {}) {
  const std::size_t m = goals.size();
  detail::check_budget(detail::product_count(goals, 1), settings.state_budget, "state");
  std::vector<std::size_t> stride(m);
  std::size_t states = 1;
  for (std::size_t l = 0; l < m; ++l) {
    stride[l] = states;
    states *= static_cast<std::size_t>(goals[l] + 1);
  }
  std::vector<Real> mass(states, Real(0));
  mass[0] = Real(1);
  std::vector<detail::CompensatedSum<Real>> tau(m);
  std::vector<std::int64_t> xi(m, 0);
  for (std::size_t idx = 0; idx < states; ++idx) {
    const Real w = mass[idx];
    if (w != Real(0)) {
      std::size_t open = 0;
      std::size_t only = 0;
      Real open_sum(0);
      for (std::size_t l = 0; l < m; ++l) {
        if (xi[l] < goals[l]) {
          ++open;
          only = l;
          open_sum += probs[l];
        }
      }
      if (open == 1) {
        tau[only].add(w);
      } else if (open > 1) {
        const Real scale = w / open_sum;
        for (std::size_t l = 0; l < m; ++l) {
          if (xi[l] < goals[l]) mass[idx + stride[l]] += scale * probs[l];
        }
      }
    }
    for (std::size_t l = 0; l < m && ++xi[l] == goals[l] + 1; ++l) xi[l] = 0;
  }
  std::vector<Real> out(m);
  for (std::size_t l = 0; l < m; ++l) out[l] = tau[l].value();
  return out;
}

inline RaceProbabilities win_probs_dp(const GameSpec& game, const ExactSettings& settings = {}) {
  validate(game);
  const auto goals = game.integer_goals();
  return {RaceKind::Win, win_probs_dp_values<double>(goals, game.probs, settings), Method::DP,
          0.0};
}

inline RaceProbabilities last_probs_dp(const GameSpec& game, const ExactSettings& settings = {}) {
  validate(game);
  const auto goals = game.integer_goals();
  return {RaceKind::Last, last_probs_dp_values<double>(goals, game.probs, settings), Method::DP,
          0.0};
}

/// pi_player as the finite negative multinomial sum with the player moved to the front.
inline double win_prob_negmulti(const GameSpec& game, std::size_t player,
                                const ExactSettings& settings = {}) {
  validate(game);
  detail::check_player(game, player);
  const auto goals = game.integer_goals();
  std::vector<std::int64_t> limits;
  std::vector<double> log_tail;
  for (auto k : detail::others_of(game.m(), player)) {
    limits.push_back(goals[k]);
    log_tail.push_back(std::log(game.probs[k]));
  }
  detail::check_budget(detail::product_count(limits), settings.term_budget, "sum term");
  return detail::negmulti_rectangle(goals[player], std::log(game.probs[player]), log_tail,
                                    limits);
}

/// I_{n1/(n1+n2)}(n1, n2).
inline double win_prob_two_player(std::int64_t n1, std::int64_t n2) {
  if (n1 < 1 || n2 < 1) throw DomainError("goals must be >= 1");
  const double a = static_cast<double>(n1);
  const double b = static_cast<double>(n2);
  return specfn::reg_inc_beta(a / (a + b), a, b);
}

/// pi_player for canonical probabilities as a nested sum over the middle
/// players of Gamma-ratio weights times I_{S/T}(K, n_last), where the player is
/// moved to the front, S sums all goals but the last and T sums all goals.
inline double win_prob_sum_beta(const GameSpec& game, std::size_t player = 0,
                                const ExactSettings& settings = {}) {
  validate(game);
  detail::check_player(game, player);
  if (!game.is_canonical()) {
    throw DomainError("the sum-of-beta formula needs canonical probabilities p = n / sum(n)");
  }
  const auto goals = game.integer_goals();
  const auto others = detail::others_of(game.m(), player);
  const std::int64_t n1 = goals[player];
  const std::int64_t nm = goals[others.back()];
  std::vector<std::int64_t> mid;
  for (std::size_t i = 0; i + 1 < others.size(); ++i) mid.push_back(goals[others[i]]);
  detail::check_budget(detail::product_count(mid), settings.term_budget, "sum term");

  std::int64_t s_int = n1;
  for (auto n : mid) s_int += n;
  const double s = static_cast<double>(s_int);
  const double x = s / static_cast<double>(s_int + nm);

  std::int64_t kspan = 0;
  for (auto n : mid) kspan += n - 1;
  std::vector<double> ibeta(static_cast<std::size_t>(kspan) + 1);
  std::vector<double> lgk(ibeta.size());
  for (std::int64_t j = 0; j <= kspan; ++j) {
    const double kk = static_cast<double>(n1 + j);
    ibeta[j] = specfn::reg_inc_beta(x, kk, static_cast<double>(nm));
    lgk[j] = specfn::log_gamma(kk) - kk * std::log(s);
  }
  const double dn1 = static_cast<double>(n1);
  const double head = dn1 * std::log(dn1) - specfn::log_gamma(dn1);
  if (mid.empty()) return std::exp(head + lgk[0]) * ibeta[0];

  const auto lnfact = detail::log_factorials(*std::max_element(mid.begin(), mid.end()));
  std::vector<std::vector<double>> contrib(mid.size());
  for (std::size_t j = 0; j < mid.size(); ++j) {
    const double ln_n = std::log(static_cast<double>(mid[j]));
    for (std::int64_t k = 0; k < mid[j]; ++k) {
      contrib[j].push_back(static_cast<double>(k) * ln_n - lnfact[k]);
    }
  }
  const std::size_t d = mid.size();
  std::vector<std::int64_t> k(d, 0);
  std::vector<double> partial(d + 1, 0.0);
  std::vector<std::int64_t> ksum(d + 1, 0);
  for (std::size_t j = d; j-- > 1;) partial[j] = partial[j + 1] + contrib[j][0];
  detail::CompensatedSum<double> acc;
  while (true) {
    for (std::int64_t k0 = 0; k0 < mid[0]; ++k0) {
      const std::int64_t kk = ksum[1] + k0;
      acc.add(std::exp(head + partial[1] + contrib[0][k0] + lgk[kk]) * ibeta[kk]);
    }
    std::size_t j = 1;
    while (j < d && ++k[j] == mid[j]) {
      k[j] = 0;
      ++j;
    }
    if (j >= d) break;
    for (std::size_t i = j + 1; i-- > 1;) {
      partial[i] = partial[i + 1] + contrib[i][k[i]];
      ksum[i] = ksum[i + 1] + k[i];
    }
  }
  return acc.value();
}

/// tau_player = sum over subsets S of the other players of
/// (-1)^|S| P(A_k <= n_k - 1 for k in S), each marginal being a negative
/// multinomial rectangle with probabilities renormalized over {player} + S.
inline double last_prob_inclusion_exclusion(const GameSpec& game, std::size_t player,
                                            const ExactSettings& settings = {}) {
  validate(game);
  detail::check_player(game, player);
  const auto goals = game.integer_goals();
  const auto others = detail::others_of(game.m(), player);
  if (others.size() > 40) throw BudgetError("too many players for inclusion-exclusion");
  std::vector<std::int64_t> og;
  for (auto k : others) og.push_back(goals[k]);
  detail::check_budget(detail::product_count(og, 1), settings.term_budget, "sum term");

  const std::uint64_t subsets = std::uint64_t{1} << others.size();
  detail::CompensatedSum<double> acc;
  acc.add(1.0);
  std::vector<std::int64_t> limits;
  std::vector<double> log_tail;
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    limits.clear();
    log_tail.clear();
    detail::CompensatedSum<double> denom;
    denom.add(game.probs[player]);
    for (std::size_t j = 0; j < others.size(); ++j) {
      if (mask >> j & 1) denom.add(game.probs[others[j]]);
    }
    const double log_denom = std::log(denom.value());
    for (std::size_t j = 0; j < others.size(); ++j) {
      if (mask >> j & 1) {
        limits.push_back(og[j]);
        log_tail.push_back(std::log(game.probs[others[j]]) - log_denom);
      }
    }
    const double v = detail::negmulti_rectangle(
        goals[player], std::log(game.probs[player]) - log_denom, log_tail, limits);
    acc.add((limits.size() % 2 == 1) ? -v : v);
  }
  return acc.value();
}

}  // namespace mrace
