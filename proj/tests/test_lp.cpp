#include <gtest/gtest.h>

#include "karma/karma.hpp"
#include "oracles.hpp"

using namespace karma;

TEST(MaxEffLp, SingleLevelIsFullyConstrained) {
  const auto lp = build_max_eff_lp(constant_urgency(3));
  EXPECT_EQ(lp.n_vars(), 2u);
  EXPECT_EQ(lp.n_rows(), 3u);
  const auto sol = solve_lp(lp);
  EXPECT_NEAR(sol.value, -1.5, 1e-12);
  EXPECT_NEAR(sol.x[0], 0.5, 1e-12);
  EXPECT_NEAR(sol.x[1], 0.5, 1e-12);
}

TEST(MaxEffLp, CaseStudyDimensions) {
  const auto lp = build_max_eff_lp(build_urgency_process({1, 2, 4, 8, 16}, 0.04));
  EXPECT_EQ(lp.n_vars(), 10u);
  EXPECT_EQ(lp.n_rows(), 7u);
  EXPECT_EQ(lp.objective[psi_index(4, Outcome::kYield)], -16.0);
  EXPECT_EQ(lp.objective[psi_index(4, Outcome::kWin)], 0.0);
}

TEST(MaxEffLp, DegenerateTwoLevelMatchesVertexEnumeration) {
  const auto lp = build_max_eff_lp(build_urgency_process({1, 2}, 0.5));
  const auto sol = solve_lp(lp);
  const auto ref = oracle::enumerate_vertices(lp);
  ASSERT_GT(ref.feasible_vertices, 0);
  EXPECT_DOUBLE_EQ(sol.value, ref.value);
  // Urgency is uniform regardless of outcome; yield at the low level.
  EXPECT_NEAR(sol.value, -0.5, 1e-12);
  EXPECT_LE(lp.residual(sol.x), 1e-9);
}

TEST(MaxEffLp, CaseStudyMatchesVertexEnumeration) {
  const auto lp = build_max_eff_lp(build_urgency_process({1, 2, 4, 8, 16}, 0.04));
  const auto sol = solve_lp(lp);
  const auto ref = oracle::enumerate_vertices(lp);
  EXPECT_NEAR(sol.value, ref.value, 1e-8);
  EXPECT_LE(lp.residual(sol.x), 1e-9);
  for (double x : sol.x) EXPECT_GE(x, -1e-12);
}

TEST(MaxEffLp, RandomProcessesMatchVertexEnumeration) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> eps(0.01, 0.99);
  for (int n_u = 2; n_u <= 6; ++n_u) {
    std::vector<int> levels;
    for (int i = 0; i < n_u; ++i) levels.push_back(1 << i);
    const auto lp = build_max_eff_lp(build_urgency_process(levels, eps(rng)));
    const auto sol = solve_lp(lp);
    const auto ref = oracle::enumerate_vertices(lp);
    EXPECT_NEAR(sol.value, ref.value, 1e-8) << "n_u=" << n_u;
    EXPECT_LE(lp.residual(sol.x), 1e-9);
    for (double x : sol.x) EXPECT_GE(x, -1e-12);
  }
}

TEST(SolveLp, GeneralProblems) {
  // max x + y s.t. x + 2y + s = 4, 3x + y + t = 6: optimum (1.6, 1.2).
  LpProblem p{{1, 1, 0, 0}, {{1, 2, 1, 0}, {3, 1, 0, 1}}, {4, 6}};
  auto sol = solve_lp(p);
  EXPECT_NEAR(sol.value, 2.8, 1e-12);
  EXPECT_NEAR(oracle::enumerate_vertices(p).value, 2.8, 1e-12);

  // Negative right-hand side is normalized internally.
  LpProblem neg{{-1, 0}, {{-1, -1}}, {-2}};
  sol = solve_lp(neg);
  EXPECT_NEAR(sol.value, 0.0, 1e-12);
  EXPECT_NEAR(sol.x[1], 2.0, 1e-12);
}

TEST(SolveLp, Errors) {
  LpProblem infeasible{{1, 1}, {{1, 1}, {1, 1}}, {1, 2}};
  EXPECT_THROW(solve_lp(infeasible), SolverError);
  LpProblem unbounded{{1, 0}, {{1, -1}}, {0}};
  EXPECT_THROW(solve_lp(unbounded), SolverError);
  LpProblem malformed{{1, 0}, {{1}}, {0}};
  EXPECT_THROW(solve_lp(malformed), ParameterError);
}
