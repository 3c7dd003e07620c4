#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "karma/urgency.hpp"

namespace karma {

using Rng = std::mt19937_64;

/// Fair coin from the top bit of one draw.
inline bool coin(Rng& rng) { return (rng() >> 63) != 0; }

struct PairOutcome {
  Outcome first;
  Outcome second;
};

/// RANDOM: a fair coin decides which of the two agents is served.
inline PairOutcome random_choose(Rng& rng) {
  return coin(rng) ? PairOutcome{Outcome::kWin, Outcome::kYield}
                   : PairOutcome{Outcome::kYield, Outcome::kWin};
}

/// Per-agent history kept by TURN.
struct TurnCounters {
  std::int64_t wins = 0;
  std::int64_t interactions = 0;
};

/// TURN: the agent served the smaller fraction of past interactions wins
/// (0/0 counts as 0); exact ties go to a fair coin. Counters are updated after
/// the decision. Returns 0 if `a` wins, 1 if `b` wins.
inline int turn_choose(TurnCounters& a, TurnCounters& b, Rng& rng) {
  // Compare wins_a / n_a with wins_b / n_b by cross-multiplication.
  const std::int64_t na = a.interactions == 0 ? 1 : a.interactions;
  const std::int64_t nb = b.interactions == 0 ? 1 : b.interactions;
  const std::int64_t lhs = a.wins * nb;
  const std::int64_t rhs = b.wins * na;
  int winner;
  if (lhs < rhs) {
    winner = 0;
  } else if (rhs < lhs) {
    winner = 1;
  } else {
    winner = coin(rng) ? 0 : 1;
  }
  ++a.interactions;
  ++b.interactions;
  ++(winner == 0 ? a : b).wins;
  return winner;
}

/// Stationary distribution of the urgency chain when every interaction is
/// won with probability `win_probability`.
inline std::vector<double> stationary_urgency(const UrgencyProcess& process,
                                              double win_probability = 0.5) {
  const auto n = static_cast<Eigen::Index>(process.size());
  const Matrix m = process.mixture(win_probability);
  // Solve mu (I - M) = 0 with the last equation replaced by sum(mu) = 1.
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      A(j, i) = (i == j ? 1.0 : 0.0) - m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  A.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd mu = A.fullPivLu().solve(rhs);
  return {mu.data(), mu.data() + n};
}

/// Long-run average reward of RANDOM: every agent yields half the time,
/// independently of its urgency.
inline double random_long_run_reward(const UrgencyProcess& process) {
  const auto mu = stationary_urgency(process, 0.5);
  double r = 0.0;
  for (std::size_t u = 0; u < mu.size(); ++u) r -= 0.5 * mu[u] * process.level(u);
  return r;
}

}  // namespace karma
