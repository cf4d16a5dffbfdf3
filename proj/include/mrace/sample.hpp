#pragma once

// Monte Carlo: direct walk simulation, the gamma race, chunked reproducible
// estimation, and samplers/densities for the (inverted) Dirichlet law.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "mrace/error.hpp"
#include "mrace/model.hpp"
#include "mrace/specfn.hpp"

namespace mrace {

inline constexpr std::int64_t kWalkRoundCap = 1'000'000'000;

/// Random source with its own uniform, normal and gamma transforms so that
/// draws are identical on every standard library (the std distributions are
/// implementation-defined).
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    eng_.seed(seq);
  }

  std::uint64_t bits() { return eng_(); }

  // uniform on (0, 1)
  double uniform() {
    double u;
    do {
      u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    } while (u == 0.0);
    return u;
  }

  // Marsaglia polar method; the second variate of each pair is kept.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Gamma(shape, 1): Marsaglia-Tsang for shape >= 1, boosted from shape + 1 below.
  double gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma shape must be positive");
    if (shape < 1.0) {
      return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Vose alias table for O(1) categorical draws.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> probs) : prob_(probs.size()), alias_(probs.size()) {
    const std::size_t n = probs.size();
    if (n == 0) throw ValidationError("alias table needs at least one category");
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = probs[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      small.pop_back();
      const std::size_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
    for (auto i : small) prob_[i] = 1.0, alias_[i] = i;
  }

  std::size_t size() const { return prob_.size(); }

  std::size_t sample(Sampler& s) const {
    const std::uint64_t r = s.bits();
    const std::size_t col = static_cast<std::size_t>((r >> 32) * prob_.size() >> 32);
    const double u = static_cast<double>(r & 0xffffffffu) * 0x1.0p-32;
    return u < prob_[col] ? col : alias_[col];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

/// Outcome of one game. `order` lists players by finishing position.
struct WalkOutcome {
  std::size_t winner = 0;
  std::size_t last = 0;
  std::int64_t rounds_to_win = 0;
  std::vector<std::int64_t> finish_round;
  std::vector<std::size_t> order;
};

/// Outcome of one gamma race: finish times G_l / p_l and the induced order.
struct GammaRaceOutcome {
  std::size_t winner = 0;
  std::size_t last = 0;
  std::vector<double> finish_time;
  std::vector<std::size_t> order;
};

/// Plays rounds until every player reaches their goal. Holds the alias table
/// so repeated games reuse it.
class WalkSimulator {
 public:
  explicit WalkSimulator(const GameSpec& game, std::int64_t round_cap = kWalkRoundCap)
      : goals_((validate(game), game.integer_goals())), table_(game.probs), cap_(round_cap) {}

  WalkOutcome run(Sampler& s) const {
    const std::size_t m = goals_.size();
    WalkOutcome out;
    out.finish_round.assign(m, 0);
    out.order.reserve(m);
    std::vector<std::int64_t> pos(m, 0);
    std::int64_t round = 0;
    while (out.order.size() < m) {
      if (++round > cap_) throw RunawayError("walk exceeded the round cap");
      const std::size_t l = table_.sample(s);
      if (++pos[l] == goals_[l]) {
        out.finish_round[l] = round;
        out.order.push_back(l);
      }
    }
    out.winner = out.order.front();
    out.last = out.order.back();
    out.rounds_to_win = out.finish_round[out.winner];
    return out;
  }

 private:
  std::vector<std::int64_t> goals_;
  AliasTable table_;
  std::int64_t cap_;
};

inline WalkOutcome simulate_walk(const GameSpec& game, Sampler& s) {
  return WalkSimulator(game).run(s);
}

namespace detail {

inline std::vector<std::size_t> order_by(const std::vector<double>& t) {
  std::vector<std::size_t> idx(t.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&t](std::size_t a, std::size_t b) { return t[a] < t[b]; });
  return idx;
}

}  // namespace detail

/// Independent G_l ~ Gamma(n_l); finish times G_l / p_l. Real goals allowed.
inline GammaRaceOutcome gamma_race(const GameSpec& game, Sampler& s) {
  GammaRaceOutcome out;
  out.finish_time.resize(game.m());
  for (std::size_t l = 0; l < game.m(); ++l) {
    out.finish_time[l] = s.gamma(game.goals[l]) / game.probs[l];
  }
  out.order = detail::order_by(out.finish_time);
  out.winner = out.order.front();
  out.last = out.order.back();
  return out;
}

enum class McMethod { Walk, GammaRace };

struct McConfig {
  std::int64_t samples = 100'000;
  std::uint64_t seed = 1;
  McMethod method = McMethod::GammaRace;
  std::int64_t chunk_size = 65'536;
  unsigned workers = 0;  // 0: hardware concurrency
};

/// Frequencies of first and last place, their standard errors, the mean
/// finishing round (walk) or time (gamma race) per player, and the full
/// place distribution place_freq[player][position].
struct McEstimate {
  std::vector<double> win_hat;
  std::vector<double> last_hat;
  std::vector<double> stderr_win;
  std::vector<double> stderr_last;
  std::vector<double> mean_finish;
  std::vector<double> stderr_finish;
  std::vector<std::vector<double>> place_freq;
  std::int64_t samples = 0;
};

namespace detail {

struct ChunkTally {
  std::vector<std::int64_t> wins, lasts;
  std::vector<double> sum_finish, sum_finish_sq;
  std::vector<std::int64_t> places;  // m * m, row = player

  explicit ChunkTally(std::size_t m = 0)
      : wins(m), lasts(m), sum_finish(m), sum_finish_sq(m), places(m * m) {}

  void record(std::size_t winner, std::size_t last, std::span<const std::size_t> order,
              auto finish_of) {
    const std::size_t m = wins.size();
    ++wins[winner];
    ++lasts[last];
    for (std::size_t pos = 0; pos < m; ++pos) ++places[order[pos] * m + pos];
    for (std::size_t l = 0; l < m; ++l) {
      const double f = finish_of(l);
      sum_finish[l] += f;
      sum_finish_sq[l] += f * f;
    }
  }
};

inline std::vector<double> binomial_stderr(const std::vector<double>& phat, double n) {
  std::vector<double> se(phat.size());
  for (std::size_t i = 0; i < phat.size(); ++i) se[i] = std::sqrt(phat[i] * (1.0 - phat[i]) / n);
  return se;
}

}  // namespace detail

/// Chunk c draws from Sampler(seed, c); tallies are reduced in chunk order,
/// so the estimate depends only on (seed, samples, chunk_size).
inline McEstimate mc_estimate(const GameSpec& game, const McConfig& cfg) {
  validate(game);
  if (cfg.samples < 1) throw ValidationError("samples must be >= 1");
  if (cfg.chunk_size < 1) throw ValidationError("chunk_size must be >= 1");
  const std::size_t m = game.m();
  std::optional<WalkSimulator> walker;
  if (cfg.method == McMethod::Walk) walker.emplace(game);

  const std::int64_t chunks = (cfg.samples + cfg.chunk_size - 1) / cfg.chunk_size;
  std::vector<detail::ChunkTally> tallies(static_cast<std::size_t>(chunks), detail::ChunkTally(m));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto work = [&] {
    try {
      for (std::int64_t c = next++; c < chunks; c = next++) {
        Sampler s(cfg.seed, static_cast<std::uint64_t>(c));
        const std::int64_t n = std::min(cfg.chunk_size, cfg.samples - c * cfg.chunk_size);
        auto& t = tallies[static_cast<std::size_t>(c)];
        for (std::int64_t i = 0; i < n; ++i) {
          if (walker) {
            const WalkOutcome o = walker->run(s);
            t.record(o.winner, o.last, o.order,
                     [&o](std::size_t l) { return static_cast<double>(o.finish_round[l]); });
          } else {
            const GammaRaceOutcome o = gamma_race(game, s);
            t.record(o.winner, o.last, o.order, [&o](std::size_t l) { return o.finish_time[l]; });
          }
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = chunks;
    }
  };
  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, chunks));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  detail::ChunkTally total(m);
  for (const auto& t : tallies) {
    for (std::size_t l = 0; l < m; ++l) {
      total.wins[l] += t.wins[l];
      total.lasts[l] += t.lasts[l];
      total.sum_finish[l] += t.sum_finish[l];
      total.sum_finish_sq[l] += t.sum_finish_sq[l];
    }
    for (std::size_t i = 0; i < m * m; ++i) total.places[i] += t.places[i];
  }
  const double n = static_cast<double>(cfg.samples);
  McEstimate est;
  est.samples = cfg.samples;
  est.place_freq.assign(m, std::vector<double>(m));
  for (std::size_t l = 0; l < m; ++l) {
    est.win_hat.push_back(static_cast<double>(total.wins[l]) / n);
    est.last_hat.push_back(static_cast<double>(total.lasts[l]) / n);
    const double mean = total.sum_finish[l] / n;
    const double var = std::max(0.0, total.sum_finish_sq[l] / n - mean * mean) * n /
                       std::max(1.0, n - 1.0);
    est.mean_finish.push_back(mean);
    est.stderr_finish.push_back(std::sqrt(var / n));
    for (std::size_t pos = 0; pos < m; ++pos) {
      est.place_freq[l][pos] = static_cast<double>(total.places[l * m + pos]) / n;
    }
  }
  est.stderr_win = detail::binomial_stderr(est.win_hat, n);
  est.stderr_last = detail::binomial_stderr(est.last_hat, n);
  return est;
}

/// Parameters (n_2..n_m; n_1, lambda) of an inverted Dirichlet law.
struct IDParams {
  std::vector<double> numer_shapes;
  double denom_shape = 1.0;
  double lambda = 1.0;

  void validate() const {
    if (numer_shapes.empty()) throw DomainError("ID needs at least one numerator shape");
    for (double n : numer_shapes) {
      if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("ID shapes must be positive");
    }
    if (!(denom_shape > 0.0) || !(lambda > 0.0)) {
      throw DomainError("ID denominator shape and lambda must be positive");
    }
  }
};

/// One draw (lambda G_2 / G_1, ..., lambda G_m / G_1).
inline std::vector<double> sample_inverted_dirichlet(const IDParams& params, Sampler& s) {
  params.validate();
  const double g1 = s.gamma(params.denom_shape);
  std::vector<double> x;
  for (double n : params.numer_shapes) x.push_back(params.lambda * s.gamma(n) / g1);
  return x;
}

/// One draw (G_1, ..., G_m) / sum G.
inline std::vector<double> sample_dirichlet(std::span<const double> shapes, Sampler& s) {
  std::vector<double> g;
  for (double n : shapes) g.push_back(s.gamma(n));
  const double total = std::accumulate(g.begin(), g.end(), 0.0);
  for (auto& v : g) v /= total;
  return g;
}

/// Log density of ID(n_2..n_m; n_1, lambda) at s.
inline double id_log_density(std::span<const double> point, const IDParams& params) {
  params.validate();
  if (point.size() != params.numer_shapes.size()) {
    throw DomainError("point dimension must match the number of numerator shapes");
  }
  std::vector<double> all = {params.denom_shape};
  double total_shape = params.denom_shape;
  double acc = params.denom_shape * std::log(params.lambda);
  double sum_s = params.lambda;
  for (std::size_t k = 0; k < point.size(); ++k) {
    if (!(point[k] > 0.0) || !std::isfinite(point[k])) {
      throw DomainError("ID density needs positive coordinates");
    }
    const double n = params.numer_shapes[k];
    all.push_back(n);
    total_shape += n;
    acc += (n - 1.0) * std::log(point[k]);
    sum_s += point[k];
  }
  return acc - total_shape * std::log(sum_s) - specfn::log_mv_beta(all);
}

}  // namespace mrace
