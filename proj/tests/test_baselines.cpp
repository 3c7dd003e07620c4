#include <gtest/gtest.h>

#include "karma/karma.hpp"
#include "oracles.hpp"

using namespace karma;

TEST(RandomChoose, FairAndDeterministic) {
  Rng rng(123);
  int wins = 0;
  constexpr int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const auto o = random_choose(rng);
    ASSERT_NE(o.first, o.second);
    wins += o.first == Outcome::kWin;
  }
  EXPECT_NEAR(static_cast<double>(wins) / n, 0.5, 0.002);

  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(random_choose(a).first, random_choose(b).first);
}

TEST(TurnChoose, LowerFractionWins) {
  Rng rng(1);
  TurnCounters a{2, 10}, b{5, 10};
  EXPECT_EQ(turn_choose(a, b, rng), 0);
  EXPECT_EQ(a.wins, 3);
  EXPECT_EQ(a.interactions, 11);
  EXPECT_EQ(b.wins, 5);
  EXPECT_EQ(b.interactions, 11);

  TurnCounters fresh{}, veteran{1, 4};
  EXPECT_EQ(turn_choose(fresh, veteran, rng), 0);
}

TEST(TurnChoose, FirstMeetingIsACoinFlip) {
  Rng rng(77);
  int first = 0;
  for (int i = 0; i < 20000; ++i) {
    TurnCounters a{}, b{};
    first += turn_choose(a, b, rng) == 0;
  }
  EXPECT_NEAR(first / 20000.0, 0.5, 0.02);
}

TEST(TurnChoose, RepeatedPairAlternates) {
  Rng rng(8);
  TurnCounters a{}, b{};
  for (int i = 0; i < 10000; ++i) turn_choose(a, b, rng);
  EXPECT_NEAR(static_cast<double>(a.wins) / a.interactions, 0.5, 0.01);
  EXPECT_NEAR(static_cast<double>(b.wins) / b.interactions, 0.5, 0.01);
  EXPECT_LE(a.wins, a.interactions);
}

TEST(StationaryUrgency, MatchesPowerIteration) {
  const auto proc = build_urgency_process({1, 2, 4, 8, 16}, 0.04);
  const auto mu = stationary_urgency(proc, 0.5);
  const auto ref = oracle::power_iteration(proc.mixture(0.5));
  for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(mu[i], ref[i], 1e-12);
}

namespace {

GameConfig sim_config(std::uint64_t seed) {
  GameConfig c;
  c.rng_seed = seed;
  return c;
}

}  // namespace

TEST(RandomBaseline, LongRunRewardMatchesMarkovChain) {
  const double analytic = random_long_run_reward(GameConfig{}.process());
  const auto r = run_experiment(sim_config(2024), Mechanism::random());
  EXPECT_NEAR(r.r_bar, analytic, 0.02 * std::abs(analytic));
}

TEST(TurnBaseline, EveryAgentServedHalfTheTime) {
  GameConfig c = sim_config(99);
  c.burn_in = 0;
  const UrgencyProcess proc = c.process();
  Population pop = initialize_population(c);
  const Mechanism turn = Mechanism::turn();
  for (int t = 0; t < c.n_rounds; ++t) run_round(pop, turn, proc);
  for (const auto& tc : pop.turn) {
    ASSERT_EQ(tc.interactions, c.n_rounds);
    EXPECT_NEAR(static_cast<double>(tc.wins) / tc.interactions, 0.5, 0.02);
  }
}

TEST(MaxEffBound, DominatesSimulatedAllocationRules) {
  GameConfig c = sim_config(5);
  const double bound = solve_lp(build_max_eff_lp(c.process())).value;
  for (const auto& m : {Mechanism::random(), Mechanism::turn(), Mechanism::greedy_urgency()}) {
    const auto r = run_experiment(c, m);
    EXPECT_GE(bound, r.r_bar - 0.02 * std::abs(r.r_bar)) << to_string(m.kind());
  }
}
