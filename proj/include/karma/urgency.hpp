#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "karma/error.hpp"

namespace karma {

/// Interaction outcome from the ego agent's point of view.
enum class Outcome : int { kWin = 0, kYield = 1 };

inline constexpr std::array<Outcome, 2> kOutcomes{Outcome::kWin, Outcome::kYield};

inline constexpr int index_of(Outcome o) { return static_cast<int>(o); }

using Matrix = std::vector<std::vector<double>>;

/// Finite urgency chain whose transition depends on the outcome of the last
/// interaction: phi(o)[i][j] = Pr(u_j next | u_i now, outcome o).
class UrgencyProcess {
 public:
  static constexpr double kRowTolerance = 1e-12;

  UrgencyProcess(std::vector<int> levels, std::array<Matrix, 2> phi,
                 double epsilon = 0.0)
      : levels_(std::move(levels)), phi_(std::move(phi)), epsilon_(epsilon) {
    validate();
  }

  std::size_t size() const { return levels_.size(); }
  const std::vector<int>& levels() const { return levels_; }
  int level(std::size_t i) const { return levels_.at(i); }
  int max_level() const { return levels_.back(); }
  const Matrix& phi(Outcome o) const { return phi_[index_of(o)]; }
  double phi(Outcome o, std::size_t from, std::size_t to) const {
    return phi_[index_of(o)][from][to];
  }
  /// Zero when the matrices were supplied directly.
  double epsilon() const { return epsilon_; }

  /// Row-stochastic matrix of the chain when both outcomes are equally likely.
  Matrix mixture(double win_probability = 0.5) const {
    const std::size_t n = size();
    Matrix m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        m[i][j] = win_probability * phi_[0][i][j] +
                  (1.0 - win_probability) * phi_[1][i][j];
      }
    }
    return m;
  }

  /// Every level reaches every other level under the 0.5/0.5 mixture.
  bool irreducible() const {
    const std::size_t n = size();
    const Matrix m = mixture();
    for (std::size_t start = 0; start < n; ++start) {
      std::vector<bool> seen(n, false);
      std::vector<std::size_t> stack{start};
      seen[start] = true;
      while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < n; ++j) {
          if (m[i][j] > 0.0 && !seen[j]) {
            seen[j] = true;
            stack.push_back(j);
          }
        }
      }
      for (bool s : seen) {
        if (!s) return false;
      }
    }
    return true;
  }

 private:
  void validate() const {
    const std::size_t n = levels_.size();
    if (n == 0) throw ParameterError("urgency_levels", "must not be empty");
    for (std::size_t i = 0; i < n; ++i) {
      if (levels_[i] < 0) {
        throw ParameterError("urgency_levels", "levels must be nonnegative");
      }
      if (i > 0 && levels_[i] <= levels_[i - 1]) {
        throw ParameterError("urgency_levels", "levels must be strictly increasing");
      }
    }
    for (int o = 0; o < 2; ++o) {
      const std::string field = o == 0 ? "phi_win" : "phi_yield";
      if (phi_[o].size() != n) throw ParameterError(field, "wrong number of rows");
      for (const auto& row : phi_[o]) {
        if (row.size() != n) throw ParameterError(field, "wrong number of columns");
        double sum = 0.0;
        for (double p : row) {
          if (!(p >= 0.0)) throw ParameterError(field, "negative entry");
          sum += p;
        }
        if (std::abs(sum - 1.0) > kRowTolerance) {
          throw ParameterError(field, "row does not sum to 1");
        }
      }
    }
    if (!irreducible()) {
      throw ParameterError("phi", "urgency chain is not irreducible");
    }
  }

  std::vector<int> levels_;
  std::array<Matrix, 2> phi_;
  double epsilon_;
};

/// Reset-on-win / escalate-on-yield urgency chain. Winning sends the agent to
/// the lowest level with probability 1 - epsilon; yielding moves it one level
/// up (saturating at the top) with probability 1 - epsilon. The remaining
/// epsilon is spread evenly over the other levels.
inline UrgencyProcess build_urgency_process(std::vector<int> levels, double epsilon) {
  const std::size_t n = levels.size();
  if (n < 2) throw ParameterError("urgency_levels", "need at least two levels");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ParameterError("epsilon", "must lie in (0, 1)");
  }
  const double off = epsilon / static_cast<double>(n - 1);
  std::array<Matrix, 2> phi{Matrix(n, std::vector<double>(n, off)),
                            Matrix(n, std::vector<double>(n, off))};
  for (std::size_t i = 0; i < n; ++i) {
    phi[0][i][0] = 1.0 - epsilon;
    phi[1][i][std::min(i + 1, n - 1)] = 1.0 - epsilon;
  }
  return UrgencyProcess(std::move(levels), std::move(phi), epsilon);
}

/// Single-level process: both matrices are [[1]].
inline UrgencyProcess constant_urgency(int level) {
  return UrgencyProcess({level}, {Matrix{{1.0}}, Matrix{{1.0}}});
}

}  // namespace karma
