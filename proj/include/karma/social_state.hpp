#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "karma/error.hpp"

namespace karma {

/// Private state of one agent: urgency index and karma balance.
struct AgentState {
  int u = 0;
  int k = 0;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Joint distribution over (urgency index, karma) on the truncated karma range
/// {0, ..., k_max} together with the shared bidding policy. Mass and policy
/// rows are stored flat, state index = u * (k_max + 1) + k.
class SocialState {
 public:
  static constexpr double kTolerance = 1e-10;

  SocialState() = default;

  SocialState(int n_urgency, int k_max)
      : n_urgency_(n_urgency),
        k_max_(k_max),
        mass_(static_cast<std::size_t>(n_urgency) * (k_max + 1), 0.0),
        policy_(mass_.size()) {
    if (n_urgency <= 0) throw ParameterError("urgency_levels", "must not be empty");
    if (k_max < 0) throw ParameterError("k_max", "must be nonnegative");
    for (int u = 0; u < n_urgency_; ++u) {
      for (int k = 0; k <= k_max_; ++k) {
        policy_[index(u, k)].assign(static_cast<std::size_t>(k) + 1, 0.0);
      }
    }
  }

  /// Urgency uniform, karma a point mass at `k_bar`, bids uniform over {0..k}.
  static SocialState initial(int n_urgency, int k_max, int k_bar) {
    if (k_bar < 0 || k_bar > k_max) throw ParameterError("k_bar", "must lie in [0, k_max]");
    SocialState s(n_urgency, k_max);
    for (int u = 0; u < n_urgency; ++u) {
      s.mass(u, k_bar) = 1.0 / n_urgency;
      for (int k = 0; k <= k_max; ++k) {
        auto row = s.policy(u, k);
        for (double& p : row) p = 1.0 / static_cast<double>(row.size());
      }
    }
    return s;
  }

  int n_urgency() const { return n_urgency_; }
  int k_max() const { return k_max_; }
  std::size_t n_states() const { return mass_.size(); }

  std::size_t index(int u, int k) const {
    return static_cast<std::size_t>(u) * (k_max_ + 1) + static_cast<std::size_t>(k);
  }
  AgentState state_at(std::size_t i) const {
    return {static_cast<int>(i / (k_max_ + 1)), static_cast<int>(i % (k_max_ + 1))};
  }

  double& mass(int u, int k) { return mass_[index(u, k)]; }
  double mass(int u, int k) const { return mass_[index(u, k)]; }
  std::vector<double>& masses() { return mass_; }
  const std::vector<double>& masses() const { return mass_; }

  std::span<double> policy(int u, int k) { return policy_[index(u, k)]; }
  std::span<const double> policy(int u, int k) const { return policy_[index(u, k)]; }
  std::vector<std::vector<double>>& policies() { return policy_; }
  const std::vector<std::vector<double>>& policies() const { return policy_; }

  double mean_karma() const {
    double m = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) m += mass_[i] * state_at(i).k;
    return m;
  }

  double expected_bid(int u, int k) const {
    double e = 0.0;
    const auto row = policy(u, k);
    for (std::size_t b = 0; b < row.size(); ++b) e += row[b] * static_cast<double>(b);
    return e;
  }

  /// Throws ParameterError naming the first violated invariant.
  void validate(double tol = kTolerance) const {
    double total = 0.0;
    for (double m : mass_) {
      if (!(m >= 0.0)) throw ParameterError("social.d", "negative mass");
      total += m;
    }
    if (std::abs(total - 1.0) > tol) throw ParameterError("social.d", "mass does not sum to 1");
    for (std::size_t i = 0; i < policy_.size(); ++i) {
      const auto& row = policy_[i];
      if (row.size() != static_cast<std::size_t>(state_at(i).k) + 1) {
        throw ParameterError("social.pi", "bid support must be {0..k}");
      }
      double s = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) throw ParameterError("social.pi", "negative probability");
        s += p;
      }
      if (std::abs(s - 1.0) > tol) throw ParameterError("social.pi", "policy row does not sum to 1");
    }
  }

  bool valid(double tol = kTolerance) const {
    try {
      validate(tol);
      return true;
    } catch (const ParameterError&) {
      return false;
    }
  }

 private:
  int n_urgency_ = 0;
  int k_max_ = 0;
  std::vector<double> mass_;
  std::vector<std::vector<double>> policy_;
};

/// Total-variation distance between two mass vectors of equal length.
inline double total_variation(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace karma
