#pragma once

// Game specification, validation, presets and the recurrence classifier.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrace/detail/sum.hpp"
#include "mrace/error.hpp"

namespace mrace {

enum class RaceKind { Win, Last };
enum class Method { DP, NegMulti, SumBeta, InclExcl, Quad, MC };
enum class Recurrence { Recurrent, Transient };

inline constexpr double kProbSumTol = 1e-12;
inline constexpr double kNormalizeWarnTol = 1e-9;

/// m players; goals n_1..n_m and advancing probabilities p_1..p_m.
/// Goals are stored as reals so that quad can take non-integer values;
/// the exact methods call integer_goals() and refuse otherwise.
struct GameSpec {
  std::vector<double> goals;
  std::vector<double> probs;
  double prob_scale = 1.0;  // sum of the probabilities as supplied, before normalizing

  std::size_t m() const { return goals.size(); }

  bool has_integer_goals() const {
    return std::all_of(goals.begin(), goals.end(), [](double g) {
      return g == std::floor(g) && g < 9.0e15;
    });
  }

  std::vector<std::int64_t> integer_goals() const {
    if (!has_integer_goals()) {
      throw ValidationError("exact methods need integer goals; use the quad method for real goals");
    }
    std::vector<std::int64_t> out(goals.size());
    std::transform(goals.begin(), goals.end(), out.begin(),
                   [](double g) { return static_cast<std::int64_t>(g); });
    return out;
  }

  // p_l == n_l / sum(n) to within tol (relative).
  bool is_canonical(double tol = 1e-12) const {
    const double total = detail::compensated_sum(goals);
    for (std::size_t i = 0; i < goals.size(); ++i) {
      const double c = goals[i] / total;
      if (std::fabs(probs[i] - c) > tol * c) return false;
    }
    return true;
  }

  bool normalization_warning() const {
    return std::fabs(prob_scale - 1.0) > kNormalizeWarnTol;
  }
};

struct RaceProbabilities {
  RaceKind kind = RaceKind::Win;
  std::vector<double> values;
  Method method = Method::DP;
  double error_bound = 0.0;
};

struct RecurrenceVerdict {
  double eta = 1.0;
  Recurrence verdict = Recurrence::Transient;
};

inline std::string_view to_string(RaceKind k) { return k == RaceKind::Win ? "win" : "last"; }

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::DP: return "dp";
    case Method::NegMulti: return "negmulti";
    case Method::SumBeta: return "sumbeta";
    case Method::InclExcl: return "inclexcl";
    case Method::Quad: return "quad";
    case Method::MC: return "mc";
  }
  return "?";
}

inline std::string_view to_string(Recurrence r) {
  return r == Recurrence::Recurrent ? "recurrent" : "transient";
}

namespace detail {

inline void check_goals(std::span<const double> goals) {
  if (goals.size() < 2) throw ValidationError("a game needs at least two players");
  for (double g : goals) {
    if (!std::isfinite(g) || !(g >= 1.0)) {
      throw ValidationError("every goal must be a finite number >= 1");
    }
  }
}

inline void check_probs(std::span<const double> probs) {
  for (double p : probs) {
    if (!std::isfinite(p) || !(p > 0.0)) {
      throw ValidationError("every advancing probability must be positive and finite");
    }
  }
}

inline void check_player(const GameSpec& g, std::size_t player) {
  if (player >= g.m()) throw ValidationError("player index out of range");
}

}  // namespace detail

/// Throws ValidationError unless the GameSpec invariants hold.
inline void validate(const GameSpec& g) {
  detail::check_goals(g.goals);
  if (g.probs.size() != g.goals.size()) {
    throw ValidationError("goals and probs must have the same length");
  }
  detail::check_probs(g.probs);
  for (double p : g.probs) {
    if (p >= 1.0) throw ValidationError("advancing probabilities must lie in (0,1)");
  }
  if (std::fabs(detail::compensated_sum(g.probs) - 1.0) > kProbSumTol) {
    throw ValidationError("advancing probabilities must sum to 1");
  }
}

/// Canonical probabilities p_l = n_l / sum(n).
inline GameSpec game_from_goals(std::vector<double> goals) {
  detail::check_goals(goals);
  const double total = detail::compensated_sum(goals);
  GameSpec g;
  g.probs.resize(goals.size());
  for (std::size_t i = 0; i < goals.size(); ++i) g.probs[i] = goals[i] / total;
  g.goals = std::move(goals);
  return g;
}

/// Arbitrary probabilities, divided by their sum. The sum is kept in prob_scale.
inline GameSpec game_from_goals_probs(std::vector<double> goals, std::vector<double> probs) {
  detail::check_goals(goals);
  if (probs.size() != goals.size()) {
    throw ValidationError("goals and probs must have the same length");
  }
  detail::check_probs(probs);
  const double total = detail::compensated_sum(probs);
  GameSpec g;
  g.prob_scale = total;
  g.probs.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) g.probs[i] = probs[i] / total;
  g.goals = std::move(goals);
  return g;
}

/// The two-dice game: player k advances when the dice sum to k+1.
inline GameSpec dice_preset() { return game_from_goals({1, 2, 3, 4, 5, 6, 5, 4, 3, 2, 1}); }

/// eta = (prod m p_j)^(1/m). Recurrent iff eta == 1 and m <= 3.
inline RecurrenceVerdict classify_recurrence(std::span<const double> probs) {
  if (probs.size() < 2) throw ValidationError("need at least two probabilities");
  detail::check_probs(probs);
  if (std::fabs(detail::compensated_sum(probs) - 1.0) > kNormalizeWarnTol) {
    throw ValidationError("probabilities must sum to 1");
  }
  const double m = static_cast<double>(probs.size());
  // sorted accumulation keeps eta invariant under permutation
  std::vector<double> logs(probs.size());
  std::transform(probs.begin(), probs.end(), logs.begin(),
                 [m](double p) { return std::log(m * p); });
  std::sort(logs.begin(), logs.end());
  const double eta = std::min(1.0, std::exp(detail::compensated_sum(logs) / m));
  RecurrenceVerdict v;
  v.eta = eta;
  v.verdict = (std::fabs(eta - 1.0) <= 1e-12 && probs.size() <= 3) ? Recurrence::Recurrent
                                                                   : Recurrence::Transient;
  return v;
}

}  // namespace mrace
