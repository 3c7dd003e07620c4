#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "karma/error.hpp"
#include "karma/urgency.hpp"

namespace karma {

/// Model and experiment scalars. Defaults reproduce the ride-hailing case
/// study: five urgency levels, N = T = 1000, alpha = 0.98, mean karma 10.
struct GameConfig {
  std::vector<int> urgency_levels{1, 2, 4, 8, 16};
  double epsilon = 0.04;
  /// Replaces the epsilon construction when set (index 0: win, 1: yield).
  std::optional<std::array<Matrix, 2>> phi_override;
  double alpha = 0.98;
  int k_bar = 10;
  int k_max = 40;
  int n_agents = 1000;
  int n_rounds = 1000;
  /// Rounds simulated before metrics start accumulating.
  int burn_in = 100;
  /// Independent simulation seeds per mechanism in `compare`.
  int replications = 1;
  std::uint64_t rng_seed = 42;

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("alpha", "must lie in [0, 1)");
    if (!phi_override && !(epsilon > 0.0 && epsilon < 1.0)) {
      throw ParameterError("epsilon", "must lie in (0, 1)");
    }
    if (k_bar < 0) throw ParameterError("k_bar", "must be nonnegative");
    if (k_max <= k_bar) throw ParameterError("k_max", "must exceed k_bar");
    if (k_max < 2 * k_bar) throw ParameterError("k_max", "must be at least 2 * k_bar");
    if (n_agents <= 0) throw ParameterError("n_agents", "must be positive");
    if (n_agents % 2 != 0) throw ParameterError("n_agents", "must be even");
    if (n_rounds <= 0) throw ParameterError("n_rounds", "must be positive");
    if (burn_in < 0) throw ParameterError("burn_in", "must be nonnegative");
    if (replications <= 0) throw ParameterError("replications", "must be positive");
    if (urgency_levels.empty()) throw ParameterError("urgency_levels", "must not be empty");
  }

  friend bool operator==(const GameConfig&, const GameConfig&) = default;

  UrgencyProcess process() const {
    if (phi_override) return UrgencyProcess(urgency_levels, *phi_override);
    if (urgency_levels.size() == 1) return constant_urgency(urgency_levels.front());
    return build_urgency_process(urgency_levels, epsilon);
  }
};

/// Smoothed best-response dynamics with temperature annealing.
struct SolverConfig {
  double br_temperature = 2.0;
  double temperature_decay = 0.97;
  double temperature_floor = 1e-4;
  double step_size = 0.2;
  double tol_policy = 1e-4;
  double tol_distribution = 1e-6;
  double tol_value = 1e-10;
  int max_outer_iters = 2000;

  void validate() const {
    if (!(br_temperature > 0.0)) throw ParameterError("br_temperature", "must be positive");
    if (!(temperature_decay > 0.0 && temperature_decay <= 1.0)) {
      throw ParameterError("temperature_decay", "must lie in (0, 1]");
    }
    if (!(temperature_floor > 0.0)) throw ParameterError("temperature_floor", "must be positive");
    if (!(step_size > 0.0 && step_size <= 1.0)) throw ParameterError("step_size", "must lie in (0, 1]");
    if (!(tol_policy > 0.0)) throw ParameterError("tol_policy", "must be positive");
    if (!(tol_distribution > 0.0)) throw ParameterError("tol_distribution", "must be positive");
    if (!(tol_value > 0.0)) throw ParameterError("tol_value", "must be positive");
    if (max_outer_iters <= 0) throw ParameterError("max_outer_iters", "must be positive");
  }

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

}  // namespace karma
