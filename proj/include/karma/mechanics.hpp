#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "karma/error.hpp"
#include "karma/social_state.hpp"
#include "karma/urgency.hpp"

namespace karma {

/// Probability over {win, yield}, indexed by index_of(Outcome).
using OutcomeDistribution = std::array<double, 2>;

/// Probability that a bid of `bid` beats `opponent_bid`; ties are a fair coin.
inline double outcome_probability(int bid, int opponent_bid) {
  if (bid > opponent_bid) return 1.0;
  if (bid < opponent_bid) return 0.0;
  return 0.5;
}

/// Distribution of the bid placed by an opponent drawn from the population.
/// Indexed by bid, length k_max + 1.
inline std::vector<double> bid_marginal(const SocialState& social) {
  std::vector<double> nu(static_cast<std::size_t>(social.k_max()) + 1, 0.0);
  for (int u = 0; u < social.n_urgency(); ++u) {
    for (int k = 0; k <= social.k_max(); ++k) {
      const double m = social.mass(u, k);
      if (m == 0.0) continue;
      const auto row = social.policy(u, k);
      for (std::size_t b = 0; b < row.size(); ++b) nu[b] += m * row[b];
    }
  }
  return nu;
}

inline OutcomeDistribution outcome_distribution(int bid, std::span<const double> nu) {
  double win = 0.0;
  const int n = static_cast<int>(nu.size());
  for (int b = 0; b < std::min(bid, n); ++b) win += nu[b];
  if (bid >= 0 && bid < n) win += 0.5 * nu[bid];
  return {win, 1.0 - win};
}

/// Expected reward of one interaction: -u times the yield probability.
inline double immediate_reward(double urgency_value, const OutcomeDistribution& gamma) {
  return -urgency_value * gamma[index_of(Outcome::kYield)];
}

/// Redistribution level r that conserves karma in expectation when balances
/// are capped at `k_max`. `post_payment[k]` is the probability that an agent
/// holds k after paying its bid. Each agent receives floor(r) or ceil(r) with
/// mean r; the capped expected receipt g(r) is piecewise linear and
/// nondecreasing, and r solves g(r) = p_bar. Returns p_bar when the cap does
/// not bind.
inline double conserving_redistribution(std::span<const double> post_payment, double p_bar,
                                        int k_max) {
  int top = -1;
  for (int k = static_cast<int>(post_payment.size()) - 1; k >= 0; --k) {
    if (post_payment[static_cast<std::size_t>(k)] > 0.0) {
      top = k;
      break;
    }
  }
  if (top < 0 || top + std::ceil(p_bar) <= k_max) return p_bar;
  auto receipt = [&](int n) {
    double g = 0.0;
    for (std::size_t k = 0; k < post_payment.size(); ++k) {
      g += post_payment[k] * std::min(n, k_max - static_cast<int>(k));
    }
    return g;
  };
  // g(n) <= n, so the solution lies at or above floor(p_bar).
  for (int n = static_cast<int>(std::floor(p_bar)); n < k_max; ++n) {
    const double lo = receipt(n);
    const double hi = receipt(n + 1);
    if (hi >= p_bar) {
      if (hi == lo) return static_cast<double>(n);
      return n + std::clamp((p_bar - lo) / (hi - lo), 0.0, 1.0);
    }
  }
  return static_cast<double>(k_max);
}

/// Everything the population contributes to one agent's problem: the
/// opponent bid marginal, the win probability of every bid, the mean payment
/// and the redistribution level paid back to every agent.
struct MeanField {
  std::vector<double> nu;
  std::vector<double> win_probability;
  double p_bar = 0.0;
  double redistribution = 0.0;

  OutcomeDistribution gamma(int bid) const {
    const double w = win_probability.at(static_cast<std::size_t>(bid));
    return {w, 1.0 - w};
  }
};

inline MeanField mean_field(const SocialState& social) {
  MeanField mf;
  mf.nu = bid_marginal(social);
  mf.win_probability.resize(mf.nu.size());
  double below = 0.0;
  for (std::size_t b = 0; b < mf.nu.size(); ++b) {
    mf.win_probability[b] = below + 0.5 * mf.nu[b];
    below += mf.nu[b];
  }
  std::vector<double> post_payment(static_cast<std::size_t>(social.k_max()) + 1, 0.0);
  for (int u = 0; u < social.n_urgency(); ++u) {
    for (int k = 0; k <= social.k_max(); ++k) {
      const double m = social.mass(u, k);
      if (m == 0.0) continue;
      const auto row = social.policy(u, k);
      double pay = 0.0;
      for (std::size_t b = 0; b < row.size(); ++b) {
        const double win = row[b] * mf.win_probability[b];
        pay += win * static_cast<double>(b);
        post_payment[static_cast<std::size_t>(k) - b] += m * win;
        post_payment[static_cast<std::size_t>(k)] += m * (row[b] - win);
      }
      mf.p_bar += m * pay;
    }
  }
  mf.redistribution = conserving_redistribution(post_payment, mf.p_bar, social.k_max());
  return mf;
}

/// Mean payment per agent under pay-bid-to-society.
inline double average_payment(const SocialState& social) { return mean_field(social).p_bar; }

struct KarmaOutcome {
  int karma;
  double probability;
};

/// Next-karma lottery: pay the bid on a win, then receive floor(r) with
/// probability ceil(r) - r and ceil(r) otherwise, where r is the
/// redistribution level (the mean payment unless truncation binds). Balances
/// above `k_max` are truncated to `k_max`.
inline std::vector<KarmaOutcome> karma_transition(int k, int bid, Outcome o, double redistribution,
                                                  int k_max) {
  if (bid < 0 || bid > k) throw ParameterError("bid", "must lie in [0, k]");
  if (!(redistribution >= 0.0)) throw ParameterError("p_bar", "must be nonnegative");
  const int base = o == Outcome::kWin ? k - bid : k;
  const double lo = std::floor(redistribution);
  const double hi = std::ceil(redistribution);
  const double f_low = hi - redistribution;
  const int k_lo = std::min(base + static_cast<int>(lo), k_max);
  const int k_hi = std::min(base + static_cast<int>(hi), k_max);
  if (k_lo == k_hi) return {{k_lo, 1.0}};
  return {{k_lo, f_low}, {k_hi, 1.0 - f_low}};
}

/// Sparse entry of a transition row: flat state index and probability.
struct TransitionEntry {
  std::size_t state;
  double probability;
};

/// Sparse next-state distribution of an agent at (u, k) bidding `bid`.
/// Entries may repeat a state index; consumers accumulate.
inline std::vector<TransitionEntry> transition_entries(const UrgencyProcess& process,
                                                       const MeanField& mf, int u, int k,
                                                       int bid, int k_max) {
  const auto gamma = mf.gamma(bid);
  const std::size_t n_u = process.size();
  std::vector<TransitionEntry> out;
  out.reserve(4 * n_u);
  for (Outcome o : kOutcomes) {
    const double po = gamma[index_of(o)];
    if (po == 0.0) continue;
    for (const auto& kk : karma_transition(k, bid, o, mf.redistribution, k_max)) {
      const double pk = po * kk.probability;
      if (pk == 0.0) continue;
      for (std::size_t un = 0; un < n_u; ++un) {
        const double pu = process.phi(o, static_cast<std::size_t>(u), un);
        if (pu == 0.0) continue;
        out.push_back({un * static_cast<std::size_t>(k_max + 1) + static_cast<std::size_t>(kk.karma),
                       pk * pu});
      }
    }
  }
  return out;
}

/// Dense next-state distribution over (u+, k+), flat index u * (k_max + 1) + k.
inline std::vector<double> state_transition(const UrgencyProcess& process, int u, int k, int bid,
                                            const SocialState& social) {
  if (bid < 0 || bid > k) throw ParameterError("bid", "must lie in [0, k]");
  const MeanField mf = mean_field(social);
  std::vector<double> rho(social.n_states(), 0.0);
  for (const auto& e : transition_entries(process, mf, u, k, bid, social.k_max())) {
    rho[e.state] += e.probability;
  }
  return rho;
}

}  // namespace karma
