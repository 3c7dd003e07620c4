#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "karma/baselines.hpp"
#include "karma/config.hpp"
#include "karma/equilibrium.hpp"
#include "karma/error.hpp"
#include "karma/social_state.hpp"
#include "karma/urgency.hpp"

namespace karma {

enum class MechanismKind { kKarma, kRandom, kTurn, kGreedyUrgency };

inline std::string_view to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kKarma: return "karma";
    case MechanismKind::kRandom: return "random";
    case MechanismKind::kTurn: return "turn";
    case MechanismKind::kGreedyUrgency: return "greedy_urgency";
  }
  return "unknown";
}

inline MechanismKind parse_mechanism(std::string_view name) {
  if (name == "karma") return MechanismKind::kKarma;
  if (name == "random") return MechanismKind::kRandom;
  if (name == "turn") return MechanismKind::kTurn;
  if (name == "greedy_urgency" || name == "greedy") return MechanismKind::kGreedyUrgency;
  throw ParameterError("mechanism", "unknown mechanism '" + std::string(name) + "'");
}

/// Allocation rule for a simulated pair. KARMA carries the bidding policy as
/// cumulative bid distributions per (u, k).
class Mechanism {
 public:
  static Mechanism random() { return Mechanism(MechanismKind::kRandom); }
  static Mechanism turn() { return Mechanism(MechanismKind::kTurn); }
  static Mechanism greedy_urgency() { return Mechanism(MechanismKind::kGreedyUrgency); }

  /// Uses an arbitrary valid policy; convergence is not checked.
  static Mechanism karma(const SocialState& policy) {
    Mechanism m(MechanismKind::kKarma);
    m.policy_ = std::make_shared<Policy>(policy);
    return m;
  }

  static Mechanism karma(const EquilibriumResult& equilibrium) {
    if (!equilibrium.converged) {
      throw ParameterError("mechanism", "karma requires a converged equilibrium");
    }
    return karma(equilibrium.social);
  }

  MechanismKind kind() const { return kind_; }

  /// Number of urgency levels the KARMA policy covers; 0 for the others.
  int policy_levels() const { return policy_ ? policy_->n_u : 0; }

  /// Samples a bid at balance k; the policy row is looked up at min(k, k_max)
  /// and the bid never exceeds k.
  int sample_bid(int u, int k, Rng& rng) const {
    const auto& cdf = policy_->cdf(u, std::min(k, policy_->k_max));
    const double x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
    const int b = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                            static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    return std::min(b, k);
  }

 private:
  struct Policy {
    explicit Policy(const SocialState& s) : k_max(s.k_max()), n_u(s.n_urgency()) {
      s.validate();
      cdfs.reserve(s.n_states());
      for (const auto& row : s.policies()) {
        std::vector<double> c(row.size());
        std::partial_sum(row.begin(), row.end(), c.begin());
        cdfs.push_back(std::move(c));
      }
    }
    const std::vector<double>& cdf(int u, int k) const {
      return cdfs.at(static_cast<std::size_t>(u) * (k_max + 1) + static_cast<std::size_t>(k));
    }
    int k_max;
    int n_u;
    std::vector<std::vector<double>> cdfs;
  };

  explicit Mechanism(MechanismKind kind) : kind_(kind) {}

  MechanismKind kind_;
  std::shared_ptr<const Policy> policy_;
};

/// Finite population state. Karma is an exact integer ledger.
struct Population {
  std::vector<AgentState> agents;
  std::vector<TurnCounters> turn;
  std::vector<double> reward_sums;
  std::vector<int> rounds_played;
  Rng rng;

  std::int64_t total_karma() const {
    std::int64_t t = 0;
    for (const auto& a : agents) t += a.k;
    return t;
  }
  std::size_t size() const { return agents.size(); }
};

/// Every agent starts at the lowest urgency with exactly k_bar karma.
inline Population initialize_population(const GameConfig& config) {
  if (config.n_agents <= 0) throw ParameterError("n_agents", "must be positive");
  if (config.n_agents % 2 != 0) throw ParameterError("n_agents", "must be even");
  if (config.k_bar < 0) throw ParameterError("k_bar", "must be nonnegative");
  const auto n = static_cast<std::size_t>(config.n_agents);
  Population pop;
  pop.agents.assign(n, AgentState{0, config.k_bar});
  pop.turn.assign(n, TurnCounters{});
  pop.reward_sums.assign(n, 0.0);
  pop.rounds_played.assign(n, 0);
  pop.rng.seed(config.rng_seed);
  return pop;
}

/// Plays one round: uniform random perfect matching, one contest per pair,
/// payment and integer redistribution (KARMA), urgency transitions. Returns
/// the reward of every agent (0 on a win, -u on a yield).
inline std::vector<double> run_round(Population& pop, const Mechanism& mechanism,
                                     const UrgencyProcess& process) {
  if (mechanism.kind() == MechanismKind::kKarma &&
      mechanism.policy_levels() != static_cast<int>(process.size())) {
    throw ParameterError("mechanism", "policy urgency levels do not match the urgency process");
  }
  const std::size_t n = pop.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), pop.rng);

  std::vector<Outcome> outcome(n, Outcome::kYield);
  std::vector<int> payment(n, 0);
  for (std::size_t p = 0; p + 1 < n; p += 2) {
    const std::size_t i = order[p];
    const std::size_t j = order[p + 1];
    bool i_wins = false;
    switch (mechanism.kind()) {
      case MechanismKind::kKarma: {
        const int bi = mechanism.sample_bid(pop.agents[i].u, pop.agents[i].k, pop.rng);
        const int bj = mechanism.sample_bid(pop.agents[j].u, pop.agents[j].k, pop.rng);
        i_wins = bi > bj || (bi == bj && coin(pop.rng));
        payment[i_wins ? i : j] = i_wins ? bi : bj;
        break;
      }
      case MechanismKind::kRandom:
        i_wins = random_choose(pop.rng).first == Outcome::kWin;
        break;
      case MechanismKind::kTurn:
        i_wins = turn_choose(pop.turn[i], pop.turn[j], pop.rng) == 0;
        break;
      case MechanismKind::kGreedyUrgency: {
        const int ui = pop.agents[i].u;
        const int uj = pop.agents[j].u;
        i_wins = ui > uj || (ui == uj && coin(pop.rng));
        break;
      }
    }
    outcome[i_wins ? i : j] = Outcome::kWin;
  }

  std::vector<double> reward(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (outcome[i] == Outcome::kYield) {
      reward[i] = -static_cast<double>(process.level(static_cast<std::size_t>(pop.agents[i].u)));
    }
    ++pop.rounds_played[i];
  }

  if (mechanism.kind() == MechanismKind::kKarma) {
    const std::int64_t before = pop.total_karma();
    std::int64_t collected = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (payment[i] > pop.agents[i].k) throw std::logic_error("bid exceeds balance");
      pop.agents[i].k -= payment[i];
      collected += payment[i];
    }
    const auto share = static_cast<int>(collected / static_cast<std::int64_t>(n));
    const auto extra = static_cast<std::size_t>(collected % static_cast<std::int64_t>(n));
    for (auto& a : pop.agents) a.k += share;
    if (extra > 0) {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::vector<std::size_t> lucky;
      lucky.reserve(extra);
      std::sample(idx.begin(), idx.end(), std::back_inserter(lucky), extra, pop.rng);
      for (std::size_t i : lucky) ++pop.agents[i].k;
    }
    if (pop.total_karma() != before) throw std::logic_error("karma not conserved");
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = process.phi(outcome[i])[static_cast<std::size_t>(pop.agents[i].u)];
    std::discrete_distribution<int> next(row.begin(), row.end());
    pop.agents[i].u = next(pop.rng);
  }
  return reward;
}

struct MetricsReport {
  MechanismKind mechanism = MechanismKind::kRandom;
  std::uint64_t seed = 0;
  double r_bar = 0.0;
  double beta = 0.0;
  std::vector<double> agent_average_reward;
  /// Running mean of R-bar after each measured round.
  std::vector<double> r_bar_trace;
  /// Total karma after every simulated round, burn-in included (KARMA only).
  std::vector<std::int64_t> karma_totals;
  /// Karma histogram after every measured round, bins 0..max observed (KARMA only).
  std::vector<std::vector<int>> karma_histograms;
  std::optional<double> lp_bound;
};

/// Population standard deviation.
inline double population_stddev(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

/// Runs burn_in unmeasured rounds, then n_rounds measured rounds.
/// r_bar averages over agents and measured rounds; beta is minus the
/// population standard deviation of per-agent average rewards.
inline MetricsReport run_experiment(const GameConfig& config, const Mechanism& mechanism) {
  config.validate();
  const UrgencyProcess process = config.process();
  Population pop = initialize_population(config);
  MetricsReport report;
  report.mechanism = mechanism.kind();
  report.seed = config.rng_seed;
  const bool karma = mechanism.kind() == MechanismKind::kKarma;
  const std::size_t n = pop.size();

  double running = 0.0;
  for (int t = 0; t < config.burn_in + config.n_rounds; ++t) {
    const auto reward = run_round(pop, mechanism, process);
    if (karma) report.karma_totals.push_back(pop.total_karma());
    if (t < config.burn_in) continue;
    double round_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pop.reward_sums[i] += reward[i];
      round_sum += reward[i];
    }
    running += round_sum;
    const int measured = t - config.burn_in + 1;
    report.r_bar_trace.push_back(running / (static_cast<double>(n) * measured));
    if (karma) {
      int top = 0;
      for (const auto& a : pop.agents) top = std::max(top, a.k);
      std::vector<int> hist(static_cast<std::size_t>(top) + 1, 0);
      for (const auto& a : pop.agents) ++hist[static_cast<std::size_t>(a.k)];
      report.karma_histograms.push_back(std::move(hist));
    }
  }
  report.agent_average_reward.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.agent_average_reward[i] = pop.reward_sums[i] / config.n_rounds;
  }
  report.r_bar = running / (static_cast<double>(n) * config.n_rounds);
  report.beta = -population_stddev(report.agent_average_reward);
  return report;
}

}  // namespace karma
