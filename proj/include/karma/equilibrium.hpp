#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "karma/config.hpp"
#include "karma/error.hpp"
#include "karma/mechanics.hpp"
#include "karma/social_state.hpp"
#include "karma/urgency.hpp"

namespace karma {

/// Validated model: urgency chain plus the game scalars.
class Game {
 public:
  explicit Game(GameConfig config) : config_(std::move(config)), process_(make(config_)) {}

  const GameConfig& config() const { return config_; }
  const UrgencyProcess& process() const { return process_; }
  int n_urgency() const { return static_cast<int>(process_.size()); }
  int k_max() const { return config_.k_max; }
  double alpha() const { return config_.alpha; }

  SocialState initial_social_state() const {
    return SocialState::initial(n_urgency(), config_.k_max, config_.k_bar);
  }

 private:
  static UrgencyProcess make(const GameConfig& c) {
    c.validate();
    return c.process();
  }

  GameConfig config_;
  UrgencyProcess process_;
};

/// Q[s][b] for every state s and feasible bid b <= k.
using QTable = std::vector<std::vector<double>>;

struct ValueTables {
  Eigen::VectorXd V;
  Eigen::VectorXd R;
  /// Row-stochastic kernel induced by the policy, P(s, s+).
  Eigen::MatrixXd P;
  QTable Q;
  /// Sup-norm Bellman residual |R + alpha P V - V| of the returned V.
  double bellman_residual = 0.0;
};

/// Expected immediate reward per state and the policy-induced kernel.
inline void build_reward_and_kernel(const Game& game, const SocialState& social,
                                    const MeanField& mf, Eigen::VectorXd& R,
                                    Eigen::MatrixXd& P) {
  const std::size_t n = social.n_states();
  R = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto& process = game.process();
  for (std::size_t s = 0; s < n; ++s) {
    const auto [u, k] = social.state_at(s);
    const double level = process.level(static_cast<std::size_t>(u));
    const auto row = social.policy(u, k);
    for (int b = 0; b <= k; ++b) {
      const double pb = row[static_cast<std::size_t>(b)];
      if (pb == 0.0) continue;
      R(static_cast<Eigen::Index>(s)) += pb * immediate_reward(level, mf.gamma(b));
      for (const auto& e : transition_entries(process, mf, u, k, b, social.k_max())) {
        P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(e.state)) += pb * e.probability;
      }
    }
  }
}

inline QTable q_function(const Game& game, const SocialState& social, const MeanField& mf,
                         const Eigen::VectorXd& V) {
  const std::size_t n = social.n_states();
  QTable q(n);
  const auto& process = game.process();
  for (std::size_t s = 0; s < n; ++s) {
    const auto [u, k] = social.state_at(s);
    const double level = process.level(static_cast<std::size_t>(u));
    q[s].resize(static_cast<std::size_t>(k) + 1);
    for (int b = 0; b <= k; ++b) {
      double future = 0.0;
      for (const auto& e : transition_entries(process, mf, u, k, b, social.k_max())) {
        future += e.probability * V(static_cast<Eigen::Index>(e.state));
      }
      q[s][static_cast<std::size_t>(b)] = immediate_reward(level, mf.gamma(b)) + game.alpha() * future;
    }
  }
  return q;
}

/// Single-stage deviation reward of every feasible bid given V.
inline QTable q_function(const Game& game, const ValueTables& values, const SocialState& social) {
  return q_function(game, social, mean_field(social), values.V);
}

/// Solves V = R + alpha P V by dense LU with iterative refinement. Fills
/// R, P, V and Q. Throws SolverError if the residual stays above `tol_value`.
inline ValueTables policy_evaluation(const Game& game, const SocialState& social,
                                     double tol_value = 1e-9) {
  const MeanField mf = mean_field(social);
  ValueTables out;
  build_reward_and_kernel(game, social, mf, out.R, out.P);
  const auto n = out.P.rows();
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - game.alpha() * out.P;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  out.V = lu.solve(out.R);
  double residual = (out.R - A * out.V).lpNorm<Eigen::Infinity>();
  for (int refine = 0; refine < 5 && residual > tol_value; ++refine) {
    out.V += lu.solve(out.R - A * out.V);
    residual = (out.R - A * out.V).lpNorm<Eigen::Infinity>();
  }
  out.bellman_residual = residual;
  if (!(residual <= tol_value)) {
    throw SolverError("policy evaluation did not reach tol_value", residual);
  }
  out.Q = q_function(game, social, mf, out.V);
  return out;
}

/// Logit response: per state, probabilities proportional to exp(Q / temperature).
/// Exact ties receive equal mass.
inline std::vector<std::vector<double>> perturbed_best_response(const QTable& q, double temperature) {
  if (!(temperature > 0.0)) throw ParameterError("br_temperature", "must be positive");
  std::vector<std::vector<double>> policy(q.size());
  for (std::size_t s = 0; s < q.size(); ++s) {
    const auto& row = q[s];
    const double top = *std::max_element(row.begin(), row.end());
    auto& out = policy[s];
    out.resize(row.size());
    double z = 0.0;
    for (std::size_t b = 0; b < row.size(); ++b) {
      out[b] = std::exp((row[b] - top) / temperature);
      z += out[b];
    }
    for (double& p : out) p /= z;
  }
  return policy;
}

/// Largest gain any state obtains by switching to its best bid.
inline double exploitability(const QTable& q, const SocialState& social) {
  double worst = 0.0;
  for (std::size_t s = 0; s < q.size(); ++s) {
    const auto& row = q[s];
    const auto& pi = social.policies()[s];
    double expected = 0.0;
    for (std::size_t b = 0; b < row.size(); ++b) expected += pi[b] * row[b];
    const double best = *std::max_element(row.begin(), row.end());
    worst = std::max(worst, best - expected);
  }
  return worst;
}

/// One-step push-forward d P of the state distribution under the social state.
inline std::vector<double> push_forward(const Game& game, const SocialState& social) {
  const MeanField mf = mean_field(social);
  std::vector<double> next(social.n_states(), 0.0);
  for (std::size_t s = 0; s < social.n_states(); ++s) {
    const double m = social.masses()[s];
    if (m == 0.0) continue;
    const auto [u, k] = social.state_at(s);
    const auto row = social.policy(u, k);
    for (int b = 0; b <= k; ++b) {
      const double pb = row[static_cast<std::size_t>(b)];
      if (pb == 0.0) continue;
      for (const auto& e : transition_entries(game.process(), mf, u, k, b, social.k_max())) {
        next[e.state] += m * pb * e.probability;
      }
    }
  }
  return next;
}

/// Damped stationary update d <- (1 - step) d + step d P.
inline std::vector<double> stationary_distribution_step(const Game& game, const SocialState& social,
                                                        double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ParameterError("step_size", "must lie in (0, 1]");
  std::vector<double> next = push_forward(game, social);
  const auto& d = social.masses();
  for (std::size_t s = 0; s < next.size(); ++s) next[s] = (1.0 - step) * d[s] + step * next[s];
  return next;
}

struct IterationRecord {
  int iteration = 0;
  double temperature = 0.0;
  double exploitability = 0.0;
  /// Total variation between d and d P.
  double stationarity = 0.0;
  double mean_karma = 0.0;
};

struct EquilibriumResult {
  SocialState social;
  ValueTables values;
  std::vector<IterationRecord> trace;
  bool converged = false;
  int iterations = 0;

  double final_exploitability() const { return trace.empty() ? 0.0 : trace.back().exploitability; }
  double final_stationarity() const { return trace.empty() ? 0.0 : trace.back().stationarity; }
};

/// Damped logit best-response dynamics with temperature annealing. Each outer
/// iteration evaluates the current social state, records exploitability and
/// stationarity, then mixes the policy toward the logit response and the
/// distribution toward its push-forward. Never throws on non-convergence;
/// inspect `converged`.
inline EquilibriumResult solve_sne(const Game& game, const SolverConfig& solver,
                                   std::optional<SocialState> initial = std::nullopt) {
  solver.validate();
  SocialState social = initial ? std::move(*initial) : game.initial_social_state();
  if (social.n_urgency() != game.n_urgency() || social.k_max() != game.k_max()) {
    throw ParameterError("initial", "social state dimensions do not match the game");
  }
  social.validate();

  EquilibriumResult result;
  double temperature = solver.br_temperature;
  for (int it = 0;; ++it) {
    ValueTables values = policy_evaluation(game, social, solver.tol_value);
    IterationRecord rec;
    rec.iteration = it;
    rec.temperature = temperature;
    rec.exploitability = exploitability(values.Q, social);
    rec.stationarity = total_variation(social.masses(), push_forward(game, social));
    rec.mean_karma = social.mean_karma();
    result.trace.push_back(rec);

    const bool done =
        rec.exploitability <= solver.tol_policy && rec.stationarity <= solver.tol_distribution;
    if (done || it + 1 >= solver.max_outer_iters) {
      result.converged = done;
      result.iterations = it + 1;
      result.values = std::move(values);
      break;
    }

    const auto response = perturbed_best_response(values.Q, temperature);
    auto& policy = social.policies();
    for (std::size_t s = 0; s < policy.size(); ++s) {
      for (std::size_t b = 0; b < policy[s].size(); ++b) {
        policy[s][b] = (1.0 - solver.step_size) * policy[s][b] + solver.step_size * response[s][b];
      }
    }
    social.masses() = stationary_distribution_step(game, social, solver.step_size);
    temperature = std::max(temperature * solver.temperature_decay, solver.temperature_floor);
  }
  result.social = std::move(social);
  return result;
}

}  // namespace karma
