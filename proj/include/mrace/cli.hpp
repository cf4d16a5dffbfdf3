#pragma once

// The `race` command line. run() parses arguments (program name excluded),
// writes the report to `out` and diagnostics to `err`, and returns the exit
// code: 0 success, 2 usage or input error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mrace/asym.hpp"
#include "mrace/error.hpp"
#include "mrace/exact.hpp"
#include "mrace/inverse.hpp"
#include "mrace/model.hpp"
#include "mrace/model_json.hpp"
#include "mrace/quad.hpp"
#include "mrace/report.hpp"
#include "mrace/sample.hpp"

namespace mrace::cli {

inline constexpr double kAutoDpStates = 1e7;

struct Options {
  std::vector<double> goals;
  std::vector<double> probs;
  std::string game_file;
  std::string method = "auto";
  std::string kind = "both";
  double tol = 1e-10;
  std::int64_t samples = 0;
  std::uint64_t seed = 1;
  std::string mc_method = "gamma";
  unsigned workers = 0;
  std::string format = "table";
  int digits = -1;
  std::string mode;
  std::vector<double> alphas;
  std::vector<double> target;
  bool equal = false;
  std::string map = "win";
};

namespace detail {

inline GameSpec load_game(const Options& o) {
  if (!o.game_file.empty()) {
    if (!o.goals.empty() || !o.probs.empty()) {
      throw ValidationError("--game cannot be combined with --goals or --probs");
    }
    std::ifstream in(o.game_file);
    if (!in) throw ValidationError("cannot open game file " + o.game_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("game file is not valid JSON: " + std::string(e.what()));
    }
    return game_from_json(j);
  }
  if (o.goals.empty()) throw ValidationError("--goals (or --game) is required");
  if (o.probs.empty()) return game_from_goals(o.goals);
  return game_from_goals_probs(o.goals, o.probs);
}

inline void echo_game(OutputReport& r, const GameSpec& g) {
  r.inputs["goals"] = g.goals;
  r.inputs["probs"] = g.probs;
}

inline void add_game_rows(OutputReport& r, const GameSpec& g) {
  ReportRow players{"Player number", {}};
  ReportRow steps{"Steps needed to win", {}};
  ReportRow probs{"Probability of step", {}};
  for (std::size_t i = 0; i < g.m(); ++i) {
    players.cells.emplace_back(static_cast<std::int64_t>(i + 1));
    steps.cells.push_back(goal_cell(g.goals[i]));
    probs.cells.emplace_back(g.probs[i]);
  }
  r.results.push_back(std::move(players));
  r.results.push_back(std::move(steps));
  r.results.push_back(std::move(probs));
}

inline ReportRow number_row(std::string label, const std::vector<double>& v) {
  ReportRow row{std::move(label), {}};
  for (double x : v) row.cells.emplace_back(x);
  return row;
}

inline const char* kind_label(RaceKind k) {
  return k == RaceKind::Win ? "Probability to win" : "Probability to be last";
}

inline double state_count(const GameSpec& g, RaceKind kind) {
  double n = 1.0;
  for (double goal : g.goals) n *= kind == RaceKind::Win ? goal : goal + 1.0;
  return n;
}

inline std::string resolve_method(const std::string& method, const GameSpec& g, RaceKind kind) {
  if (method != "auto") return method;
  return g.has_integer_goals() && state_count(g, kind) <= kAutoDpStates ? "dp" : "quad";
}

inline McConfig mc_config(const Options& o, std::int64_t default_samples) {
  McConfig c;
  c.samples = o.samples > 0 ? o.samples : default_samples;
  c.seed = o.seed;
  c.method = o.mc_method == "walk" ? McMethod::Walk : McMethod::GammaRace;
  c.workers = o.workers;
  return c;
}

inline QuadConfig quad_config(const Options& o) {
  QuadConfig q;
  q.abs_tol = o.tol;
  q.rel_tol = o.tol;
  return q;
}

// Appends the probability row (and a standard-error row for mc) for one kind.
inline void add_kind_rows(OutputReport& r, const GameSpec& g, RaceKind kind, const Options& o) {
  const std::string method = resolve_method(o.method, g, kind);
  std::vector<double> values;
  if (method == "dp") {
    values = kind == RaceKind::Win ? win_probs_dp(g).values : last_probs_dp(g).values;
  } else if (method == "quad") {
    const RaceProbabilities p = race_probs_quad(g, kind, quad_config(o));
    values = p.values;
    r.error_bound = std::max(r.error_bound.value_or(0.0), p.error_bound);
  } else if (method == "negmulti" || method == "sumbeta") {
    if (kind != RaceKind::Win) {
      throw ValidationError(method + " computes win probabilities only; use dp or inclexcl");
    }
    for (std::size_t i = 0; i < g.m(); ++i) {
      values.push_back(method == "negmulti" ? win_prob_negmulti(g, i) : win_prob_sum_beta(g, i));
    }
  } else if (method == "inclexcl") {
    if (kind != RaceKind::Last) {
      throw ValidationError("inclexcl computes last probabilities only; use dp, negmulti or sumbeta");
    }
    for (std::size_t i = 0; i < g.m(); ++i) values.push_back(last_prob_inclusion_exclusion(g, i));
  } else {
    const McEstimate e = mc_estimate(g, mc_config(o, 100'000));
    r.inputs["samples"] = e.samples;
    r.inputs["seed"] = o.seed;
    r.inputs["mc_method"] = o.mc_method;
    r.results.push_back(number_row(kind_label(kind), kind == RaceKind::Win ? e.win_hat : e.last_hat));
    r.results.push_back(number_row("Standard error", kind == RaceKind::Win ? e.stderr_win
                                                                           : e.stderr_last));
    r.method = r.method.empty() ? "mc" : r.method;
    return;
  }
  if (r.method.empty()) {
    r.method = method;
  } else if (r.method != method) {
    r.method += "+" + method;
  }
  r.results.push_back(number_row(kind_label(kind), values));
}

inline OutputReport race_command(const std::string& name, const GameSpec& g,
                                 const std::vector<RaceKind>& kinds, const Options& o) {
  OutputReport r;
  r.command = name;
  echo_game(r, g);
  r.inputs["method"] = o.method;
  add_game_rows(r, g);
  for (RaceKind k : kinds) add_kind_rows(r, g, k, o);
  return r;
}

inline OutputReport simulate_command(const GameSpec& g, const Options& o) {
  const McConfig c = mc_config(o, 100'000);
  const McEstimate e = mc_estimate(g, c);
  OutputReport r;
  r.command = "simulate";
  echo_game(r, g);
  r.inputs["samples"] = e.samples;
  r.inputs["seed"] = o.seed;
  r.inputs["mc_method"] = o.mc_method;
  r.method = c.method == McMethod::Walk ? "mc-walk" : "mc-gamma";
  add_game_rows(r, g);
  r.results.push_back(number_row("Probability to win", e.win_hat));
  r.results.push_back(number_row("Standard error (win)", e.stderr_win));
  r.results.push_back(number_row("Probability to be last", e.last_hat));
  r.results.push_back(number_row("Standard error (last)", e.stderr_last));
  const bool walk = c.method == McMethod::Walk;
  r.results.push_back(number_row(walk ? "Mean finish round" : "Mean finish time", e.mean_finish));
  r.results.push_back(number_row("Standard error (finish)", e.stderr_finish));
  return r;
}

inline OutputReport limit_command(const Options& o) {
  OutputReport r;
  r.command = "limit";
  r.inputs["mode"] = o.mode;
  const bool win = o.mode.rfind("last-", 0) != 0;
  const std::string base = win ? o.mode : o.mode.substr(5);
  LimitValue v;
  if (base == "prop") {
    if (o.alphas.empty()) throw ValidationError("--alphas is required for mode " + o.mode);
    r.inputs["alphas"] = o.alphas;
    const ProportionVector props{o.alphas};
    v.value = win ? limit_win_proportional(props, quad_config(o))
                  : limit_last_proportional(props, quad_config(o));
    r.method = "quad";
  } else {
    if (o.goals.empty()) throw ValidationError("--goals is required for mode " + o.mode);
    r.inputs["goals"] = o.goals;
    if (base == "n1") {
      v.value = win ? limit_win_n1_inf(o.goals) : limit_last_n1_inf(o.goals);
      r.method = "closed form";
    } else {
      AsymConfig a;
      a.quad = quad_config(o);
      a.mc_samples = o.samples > 0 ? o.samples : a.mc_samples;
      a.seed = o.seed;
      v = win ? limit_win_nm_inf(o.goals, a) : limit_last_nm_inf(o.goals, a);
      r.method = v.monte_carlo ? "mc" : o.goals.size() == 1 ? "closed form" : "quad";
      if (v.monte_carlo) {
        r.inputs["samples"] = a.mc_samples;
        r.inputs["seed"] = a.seed;
      }
    }
  }
  r.results.push_back({"Limit", {v.value}});
  if (v.monte_carlo) {
    r.stderr_est = v.stderr_est;
    r.results.push_back({"Standard error", {v.stderr_est}});
  }
  return r;
}

inline OutputReport solve_command(const Options& o) {
  if (o.equal == !o.target.empty()) {
    throw ValidationError("solve needs exactly one of --target or --equal");
  }
  std::vector<double> goals = o.goals;
  if (!o.game_file.empty()) goals = load_game(o).goals;
  mrace::detail::check_goals(goals);
  std::vector<double> target = o.target;
  if (o.equal) target.assign(goals.size(), 1.0 / static_cast<double>(goals.size()));

  SolveConfig cfg;
  cfg.tol = o.tol;
  cfg.map = o.map == "last" ? RaceKind::Last : RaceKind::Win;
  const SolveResult s = solve_for_probs(goals, target, cfg);

  OutputReport r;
  r.command = "solve";
  r.inputs["goals"] = goals;
  r.inputs["target"] = target;
  r.inputs["map"] = o.map;
  r.inputs["tol"] = o.tol;
  r.method = "newton";
  r.error_bound = s.residual_inf;
  ReportRow players{"Player number", {}};
  ReportRow steps{"Steps needed to win", {}};
  for (std::size_t i = 0; i < goals.size(); ++i) {
    players.cells.emplace_back(static_cast<std::int64_t>(i + 1));
    steps.cells.push_back(goal_cell(goals[i]));
  }
  r.results.push_back(std::move(players));
  r.results.push_back(std::move(steps));
  r.results.push_back(number_row("Target", target));
  r.results.push_back(number_row("Probability of step", s.probs));
  r.results.push_back({"Iterations", {static_cast<std::int64_t>(s.iterations)}});
  if (o.equal && cfg.map == RaceKind::Win && goals.size() == 2 && goals[0] <= goals[1] &&
      goals[0] == std::floor(goals[0]) && goals[1] == std::floor(goals[1])) {
    const M2Bounds b = equal_vector_m2_bounds(static_cast<std::int64_t>(goals[0]),
                                              static_cast<std::int64_t>(goals[1]));
    r.results.push_back({"Bracket", {b.lower, b.upper}});
  }
  return r;
}

inline OutputReport recurrence_command(const Options& o) {
  std::vector<double> probs = o.probs;
  if (probs.empty()) probs = load_game(o).probs;
  double total = 0.0;
  for (double p : probs) total += p;
  if (total > 0.0) {
    for (double& p : probs) p /= total;
  }
  const RecurrenceVerdict v = classify_recurrence(probs);
  OutputReport r;
  r.command = "recurrence";
  r.inputs["probs"] = probs;
  r.method = "closed form";
  r.results.push_back({"eta", {v.eta}});
  r.results.push_back({"Verdict", {std::string(to_string(v.verdict))}});
  return r;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Multinomial race probabilities", "race"};
  app.require_subcommand(1);

  auto game_opts = [&o](CLI::App* s) {
    s->add_option("--goals", o.goals, "comma-separated goals")->delimiter(',');
    s->add_option("--probs", o.probs, "comma-separated advancing probabilities")->delimiter(',');
    s->add_option("--game", o.game_file, "JSON file {\"goals\": [...], \"probs\": [...]}");
  };
  auto output_opts = [&o](CLI::App* s) {
    s->add_option("--format", o.format)->check(CLI::IsMember({"table", "json", "csv"}));
    s->add_option("--digits", o.digits, "decimal places in table and csv output")
        ->check(CLI::Range(0, 17));
  };
  auto method_opts = [&o](CLI::App* s) {
    s->add_option("--method", o.method)
        ->check(CLI::IsMember({"auto", "dp", "negmulti", "sumbeta", "inclexcl", "quad", "mc"}));
    s->add_option("--tol", o.tol, "quadrature tolerance")->check(CLI::PositiveNumber);
  };
  auto mc_opts = [&o](CLI::App* s) {
    s->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
    s->add_option("--seed", o.seed);
    s->add_option("--mc-method", o.mc_method)->check(CLI::IsMember({"walk", "gamma"}));
    s->add_option("--workers", o.workers, "threads, 0 for all cores");
  };

  CLI::App* win = app.add_subcommand("win", "winning probabilities");
  CLI::App* last = app.add_subcommand("last", "probabilities of finishing last");
  for (CLI::App* s : {win, last}) {
    game_opts(s);
    method_opts(s);
    mc_opts(s);
    output_opts(s);
  }
  CLI::App* dice = app.add_subcommand("dice", "the two-dice game");
  dice->add_option("--kind", o.kind)->check(CLI::IsMember({"win", "last", "both"}));
  method_opts(dice);
  mc_opts(dice);
  output_opts(dice);
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimates");
  game_opts(simulate);
  mc_opts(simulate);
  output_opts(simulate);
  CLI::App* limit = app.add_subcommand("limit", "asymptotic limits");
  limit->add_option("--mode", o.mode)
      ->required()
      ->check(CLI::IsMember({"n1", "nm", "prop", "last-n1", "last-nm", "last-prop"}));
  limit->add_option("--goals", o.goals, "n2..nm for n1 modes, n1..n(m-1) for nm modes")
      ->delimiter(',');
  limit->add_option("--alphas", o.alphas, "proportions for prop modes")->delimiter(',');
  limit->add_option("--tol", o.tol)->check(CLI::PositiveNumber);
  limit->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
  limit->add_option("--seed", o.seed);
  output_opts(limit);
  CLI::App* solve = app.add_subcommand("solve", "advancing probabilities for target winning odds");
  game_opts(solve);
  solve->add_option("--target", o.target)->delimiter(',');
  solve->add_flag("--equal", o.equal, "target 1/m for every player");
  solve->add_option("--map", o.map)->check(CLI::IsMember({"win", "last"}));
  solve->add_option("--tol", o.tol)->check(CLI::PositiveNumber);
  output_opts(solve);
  CLI::App* recurrence = app.add_subcommand("recurrence", "recurrence of the centred walk");
  game_opts(recurrence);
  output_opts(recurrence);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    OutputReport r;
    if (app.got_subcommand(dice)) {
      std::vector<RaceKind> kinds;
      if (o.kind != "last") kinds.push_back(RaceKind::Win);
      if (o.kind != "win") kinds.push_back(RaceKind::Last);
      r = detail::race_command("dice", dice_preset(), kinds, o);
      if (o.digits < 0) o.digits = 3;
    } else if (app.got_subcommand(win) || app.got_subcommand(last)) {
      const GameSpec g = detail::load_game(o);
      if (g.normalization_warning()) {
        err << "race: warning: probabilities summed to " << shortest(g.prob_scale)
            << "; normalized\n";
      }
      const bool w = app.got_subcommand(win);
      r = detail::race_command(w ? "win" : "last", g, {w ? RaceKind::Win : RaceKind::Last}, o);
    } else if (app.got_subcommand(simulate)) {
      r = detail::simulate_command(detail::load_game(o), o);
    } else if (app.got_subcommand(limit)) {
      r = detail::limit_command(o);
    } else if (app.got_subcommand(solve)) {
      r = detail::solve_command(o);
    } else {
      r = detail::recurrence_command(o);
    }
    const ReportFormat fmt = o.format == "json"  ? ReportFormat::Json
                             : o.format == "csv" ? ReportFormat::Csv
                                                 : ReportFormat::Table;
    out << format_report(r, fmt, o.digits < 0 ? 6 : o.digits);
    return 0;
  } catch (const ValidationError& e) {
    err << "race: error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "race: error: " << e.what() << '\n';
    return 2;
  } catch (const BudgetError& e) {
    err << "race: error: " << e.what() << "; try --method quad\n";
    return 2;
  } catch (const ConvergenceError& e) {
    err << "race: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const RunawayError& e) {
    err << "race: numerical failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace mrace::cli
