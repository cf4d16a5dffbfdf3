#include "mrace/cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mrace {
namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation race(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string row(const std::string& text, const std::string& label) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(label, 0) == 0) return line;
  }
  return {};
}

TEST(CliGolden, DiceTables) {
  const std::string dir = MRACE_GOLDEN_DIR;
  EXPECT_EQ(race({"dice", "--digits", "3"}).out, slurp(dir + "/dice_digits3.txt"));
  EXPECT_EQ(race({"dice", "--digits", "3", "--kind", "win"}).out,
            slurp(dir + "/dice_win_digits3.txt"));
  EXPECT_EQ(race({"dice", "--digits", "3", "--kind", "last"}).out,
            slurp(dir + "/dice_last_digits3.txt"));
}

TEST(Cli, DiceRows) {
  const Invocation r = race({"dice"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(row(r.out, "Probability to win").find("0.242  0.111  0.065  0.042  0.030  0.022"),
            std::string::npos);
  EXPECT_NE(row(r.out, "Probability to be last").find("0.147  0.110  0.087  0.071  0.060  0.051"),
            std::string::npos);
  EXPECT_NE(row(r.out, "Probability of step").find("0.028  0.056  0.083  0.111  0.139  0.167"),
            std::string::npos);
}

TEST(Cli, Examples) {
  const Invocation last = race({"last", "--goals", "1,1,2"});
  ASSERT_EQ(last.code, 0);
  EXPECT_NE(row(last.out, "Probability to be last").find("0.319444"), std::string::npos);
  const Invocation neg = race({"win", "--goals", "1,2", "--method", "negmulti"});
  ASSERT_EQ(neg.code, 0);
  EXPECT_NE(row(neg.out, "Probability to win").find("0.555556"), std::string::npos);
  for (const char* m : {"dp", "sumbeta", "quad", "auto"}) {
    const Invocation w = race({"win", "--goals", "1,2", "--method", m});
    EXPECT_NE(row(w.out, "Probability to win").find("0.555556  0.444444"), std::string::npos) << m;
  }
  const Invocation ie = race({"last", "--goals", "1,1,2", "--method", "inclexcl"});
  EXPECT_NE(row(ie.out, "Probability to be last").find("0.319444"), std::string::npos);
}

TEST(Cli, JsonNumbersAreLibraryValues) {
  const Invocation r = race({"win", "--goals", "2,3,4", "--probs", "0.2,0.3,0.5", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["command"], "win");
  EXPECT_EQ(j["method"], "dp");
  const auto lib = win_probs_dp(game_from_goals_probs({2, 3, 4}, {0.2, 0.3, 0.5})).values;
  const auto got = j["results"]["Probability to win"].get<std::vector<double>>();
  ASSERT_EQ(got.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(got[i], lib[i]);

  const Invocation q = race({"last", "--goals", "2.5,3,4", "--format", "json"});
  const auto jq = nlohmann::json::parse(q.out);
  EXPECT_EQ(jq["method"], "quad");
  const auto libq = race_probs_quad(game_from_goals({2.5, 3, 4}), RaceKind::Last).values;
  EXPECT_EQ(jq["results"]["Probability to be last"].get<std::vector<double>>(), libq);
}

TEST(Cli, EverySubcommandEmitsJson) {
  const std::vector<std::vector<std::string>> cmds = {
      {"win", "--goals", "1,2"},
      {"last", "--goals", "1,2,3"},
      {"dice", "--kind", "win"},
      {"simulate", "--goals", "1,2", "--samples", "2000"},
      {"limit", "--mode", "n1", "--goals", "1"},
      {"limit", "--mode", "last-nm", "--goals", "1,1"},
      {"limit", "--mode", "prop", "--alphas", "1,2,3"},
      {"solve", "--goals", "1,2", "--equal"},
      {"recurrence", "--probs", "0.2,0.3,0.5"}};
  for (auto c : cmds) {
    c.push_back("--format");
    c.push_back("json");
    const Invocation r = race(c);
    ASSERT_EQ(r.code, 0) << c[0] << ": " << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["command"], c[0]);
    EXPECT_TRUE(j["results"].is_object());
    // serialization is stable across runs
    EXPECT_EQ(race(c).out, r.out);
  }
}

TEST(Cli, LimitValues) {
  const auto j = nlohmann::json::parse(
      race({"limit", "--mode", "n1", "--goals", "1", "--format", "json"}).out);
  EXPECT_EQ(j["results"]["Limit"].get<double>(), limit_win_n1_inf(std::vector<double>{1}));
  const auto p = nlohmann::json::parse(
      race({"limit", "--mode", "prop", "--alphas", "2,7", "--format", "json"}).out);
  EXPECT_NEAR(p["results"]["Limit"].get<double>(), 0.5, 1e-10);
  const auto mc = nlohmann::json::parse(race({"limit", "--mode", "nm", "--goals", "1,1,1",
                                              "--samples", "5000", "--format", "json"})
                                            .out);
  EXPECT_EQ(mc["method"], "mc");
  EXPECT_GT(mc["stderr"].get<double>(), 0.0);
}

TEST(Cli, SolveEqualVector) {
  const auto j = nlohmann::json::parse(
      race({"solve", "--goals", "1,4", "--equal", "--format", "json"}).out);
  const auto p = j["results"]["Probability of step"].get<std::vector<double>>();
  EXPECT_NEAR(p[0], 1.0 - std::pow(2.0, -0.25), 1e-8);
  EXPECT_EQ(race({"solve", "--goals", "1,4"}).code, 2);
}

TEST(Cli, Csv) {
  const Invocation r = race({"win", "--goals", "1,2", "--format", "csv", "--digits", "4"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out,
            "Player number,1,2\nSteps needed to win,1,2\nProbability of step,0.3333,0.6667\n"
            "Probability to win,0.5556,0.4444\n");
}

TEST(Cli, GameFile) {
  const std::string path = testing::TempDir() + "race_game.json";
  {
    std::ofstream f(path);
    f << R"({"goals": [1, 2], "probs": [0.5, 0.5]})";
  }
  const Invocation r = race({"win", "--game", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(row(r.out, "Probability to win").find("0.750000  0.250000"), std::string::npos);
  EXPECT_EQ(race({"win", "--game", path, "--goals", "1,2"}).code, 2);
  EXPECT_EQ(race({"win", "--game", path + ".missing"}).code, 2);
  std::remove(path.c_str());
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(race({}).code, 2);
  EXPECT_EQ(race({"bogus"}).code, 2);
  EXPECT_EQ(race({"win", "--goals", "1,x"}).code, 2);
  EXPECT_EQ(race({"win", "--goals", "0,2"}).code, 2);
  EXPECT_EQ(race({"win", "--goals", "1.5,2", "--method", "dp"}).code, 2);
  EXPECT_NE(race({"win", "--goals", "1.5,2", "--method", "dp"}).err.find("quad"),
            std::string::npos);
  EXPECT_EQ(race({"win", "--goals", "1,2", "--probs", "0.5,0.5", "--method", "sumbeta"}).code, 2);
  EXPECT_EQ(race({"last", "--goals", "1,2", "--method", "negmulti"}).code, 2);
  EXPECT_EQ(race({"win", "--goals", "400,400,400,400", "--method", "dp"}).code, 2);
  EXPECT_EQ(race({"limit", "--mode", "prop", "--alphas", "1,-1"}).code, 2);
  EXPECT_EQ(race({"solve", "--goals", "2,3,4", "--target", "0.7,0.2,0.1", "--tol", "1e-300"}).code,
            3);
  EXPECT_EQ(race({"win", "--help"}).code, 0);
}

TEST(Cli, NormalizationWarning) {
  const Invocation r = race({"win", "--goals", "1,2", "--probs", "1,3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_NE(row(r.out, "Probability of step").find("0.250000  0.750000"), std::string::npos);
}

TEST(Report, JsonRoundTrip) {
  OutputReport r;
  r.command = "empty";
  r.method = "none";
  const auto j = nlohmann::json::parse(format_report(r, ReportFormat::Json));
  EXPECT_EQ(j["command"], "empty");
  EXPECT_TRUE(j["results"].is_object());
  EXPECT_TRUE(j["results"].empty());
}

TEST(Report, RoundsHalfToEven) {
  EXPECT_EQ(fixed(0.125, 2), "0.12");
  EXPECT_EQ(fixed(0.375, 2), "0.38");
  EXPECT_EQ(fixed(2.5, 0), "2");
  EXPECT_EQ(fixed(-0.0001, 2), "0.00");
  EXPECT_EQ(shortest(0.1), "0.1");
}

}  // namespace
}  // namespace mrace
