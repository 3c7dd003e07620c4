#include <gtest/gtest.h>

#include "karma/karma.hpp"

using namespace karma;

TEST(ParseConfig, DefaultsAndOverrides) {
  const auto rc = parse_config_string(
      "# comment\n"
      "urgency_levels = [1, 16]   # two levels\n"
      "alpha = 0.9\n"
      "k_bar = 3\n"
      "rng_seed = 18446744073709551615\n"
      "\n"
      "step_size = 0.5\n");
  EXPECT_EQ(rc.game.urgency_levels, (std::vector<int>{1, 16}));
  EXPECT_EQ(rc.game.alpha, 0.9);
  EXPECT_EQ(rc.game.k_max, 12);
  EXPECT_EQ(rc.game.rng_seed, 18446744073709551615ULL);
  EXPECT_EQ(rc.solver.step_size, 0.5);
  EXPECT_EQ(rc.solver.max_outer_iters, SolverConfig{}.max_outer_iters);
}

TEST(ParseConfig, MatrixOverride) {
  const auto rc = parse_config_string(
      "urgency_levels = [1, 2]\n"
      "phi_win = [[0.9, 0.1], [0.8, 0.2]]\n"
      "phi_yield = [[0.1, 0.9], [0.2, 0.8]]\n");
  ASSERT_TRUE(rc.game.phi_override.has_value());
  EXPECT_EQ(rc.game.process().phi(Outcome::kWin, 1, 0), 0.8);
}

namespace {

std::string offending_field(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ParameterError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(ParseConfig, ErrorsNameTheField) {
  EXPECT_EQ(offending_field("alpha = 1.2\n"), "alpha");
  EXPECT_EQ(offending_field("alpha = fast\n"), "alpha");
  EXPECT_EQ(offending_field("epsilon = 0\n"), "epsilon");
  EXPECT_EQ(offending_field("n_agents = 7\n"), "n_agents");
  EXPECT_EQ(offending_field("colour = blue\n"), "colour");
  EXPECT_EQ(offending_field("urgency_levels = [4, 2]\n"), "urgency_levels");
  EXPECT_EQ(offending_field("urgency_levels = 1, 2\n"), "urgency_levels");
  EXPECT_EQ(offending_field("phi_win = [[1]]\n"), "phi_yield");
  EXPECT_EQ(offending_field("k_bar = 10\nk_max = 15\n"), "k_max");
  EXPECT_EQ(offending_field("step_size = 2\n"), "step_size");
  EXPECT_EQ(offending_field("just words\n"), "line 1");
  EXPECT_THROW(load_config("/nonexistent/karma.cfg"), IoError);
}

TEST(RunManifest, RoundTripsThroughJson) {
  RunManifest m;
  m.command = "compare";
  m.config.game.alpha = 0.975;
  m.config.game.rng_seed = 0xFFFFFFFFFFFFFFFFULL;
  m.config.game.phi_override =
      std::array<Matrix, 2>{Matrix{{0.3, 0.7}, {0.1, 0.9}}, Matrix{{0.6, 0.4}, {1.0 / 3, 2.0 / 3}}};
  m.config.solver.tol_policy = 1.0 / 7;
  m.mechanisms = {"karma", "random"};
  m.seed = 17;
  m.outputs = {"comparison.csv"};
  m.timings_seconds["solve"] = 0.123456789;
  const std::string text = Json(m).dump();
  EXPECT_EQ(Json::parse(text).get<RunManifest>(), m);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
  const double x = 1.0 / 3;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Exports, CsvShapes) {
  GameConfig c;
  c.urgency_levels = {1, 16};
  c.k_bar = 2;
  c.k_max = 6;
  const Game g(c);
  const SocialState s = g.initial_social_state();
  const std::string policy = policy_csv(s, g.process());
  const std::string dist = distribution_csv(s, g.process());
  EXPECT_EQ(policy.rfind("urgency_level,karma,bid,probability\n", 0), 0u);
  EXPECT_EQ(dist.rfind("urgency_level,karma,mass\n", 0), 0u);
  // 2 levels * (1 + 2 + ... + 7) bid rows plus the header.
  EXPECT_EQ(std::count(policy.begin(), policy.end(), '\n'), 1 + 2 * 28);
  EXPECT_EQ(std::count(dist.begin(), dist.end(), '\n'), 1 + 2 * 7);
  EXPECT_NE(dist.find("16,2,0.5\n"), std::string::npos);
}
