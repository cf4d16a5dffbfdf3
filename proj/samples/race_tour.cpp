// A short walk through the library: exact, quadrature, simulation, limits
// and the inverse map.

#include <cstdio>
#include <vector>

#include "mrace/asym.hpp"
#include "mrace/exact.hpp"
#include "mrace/inverse.hpp"
#include "mrace/quad.hpp"
#include "mrace/sample.hpp"

int main() {
  using namespace mrace;

  const GameSpec dice = dice_preset();
  const auto win = win_probs_dp(dice).values;
  const auto last = last_probs_dp(dice).values;
  std::printf("dice game, players 1-6\n  win ");
  for (int k = 0; k < 6; ++k) std::printf(" %.3f", win[k]);
  std::printf("\n  last");
  for (int k = 0; k < 6; ++k) std::printf(" %.3f", last[k]);
  std::printf("\n");

  // Real goals and skewed probabilities need the quadrature path.
  const GameSpec odd = game_from_goals_probs({2.5, 4.0, 7.25}, {0.2, 0.3, 0.5});
  const RaceProbabilities q = race_probs_quad(odd, RaceKind::Win);
  std::printf("goals (2.5, 4, 7.25): pi = %.6f %.6f %.6f (error bound %.1e)\n", q.values[0],
              q.values[1], q.values[2], q.error_bound);

  McConfig mc;
  mc.samples = 200'000;
  mc.seed = 7;
  const McEstimate est = mc_estimate(dice, mc);
  std::printf("gamma race, %lld draws: win1 = %.4f +- %.4f\n", static_cast<long long>(est.samples),
              est.win_hat[0], est.stderr_win[0]);

  const std::vector<double> tail = {1.0};
  std::printf("n1 -> inf with n2 = 1: %.6f, proportional limit: %.6f\n", limit_win_n1_inf(tail),
              limit_win_proportional({{1.0, 1.0}}));

  const SolveResult fair = equal_probability_vector(std::vector<double>{2.0, 5.0});
  std::printf("fair two-player game for goals (2, 5): p = (%.6f, %.6f) after %d steps\n",
              fair.probs[0], fair.probs[1], fair.iterations);
  return 0;
}
