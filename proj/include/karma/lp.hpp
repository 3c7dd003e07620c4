#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "karma/error.hpp"
#include "karma/urgency.hpp"

namespace karma {

/// maximize objective . x  subject to  A x = rhs,  x >= 0.
struct LpProblem {
  std::vector<double> objective;
  Matrix A;
  std::vector<double> rhs;

  std::size_t n_vars() const { return objective.size(); }
  std::size_t n_rows() const { return A.size(); }

  void validate() const {
    if (rhs.size() != A.size()) throw ParameterError("lp.rhs", "length must equal row count");
    for (const auto& row : A) {
      if (row.size() != objective.size()) {
        throw ParameterError("lp.A", "row length must equal variable count");
      }
    }
  }

  /// Largest absolute equality violation of x.
  double residual(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) s += A[i][j] * x[j];
      worst = std::max(worst, std::abs(s - rhs[i]));
    }
    return worst;
  }
};

struct LpSolution {
  double value = 0.0;
  std::vector<double> x;
};

namespace detail {

/// Dense simplex tableau; the last row holds reduced costs of a minimization.
class Tableau {
 public:
  static constexpr double kPivotTolerance = 1e-11;

  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double& cost(std::size_t c) { return at(rows_, c); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double p = at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) /= p;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  /// Bland's rule: smallest improving column, ties in the ratio test broken by
  /// smallest basic variable index. Columns at or beyond `allowed` are frozen.
  /// Returns false when unbounded.
  bool optimize(std::size_t allowed) {
    for (std::size_t guard = 0; guard < 100000; ++guard) {
      std::size_t enter = allowed;
      for (std::size_t c = 0; c < allowed; ++c) {
        if (cost(c) < -1e-12) {
          enter = c;
          break;
        }
      }
      if (enter == allowed) return true;
      std::size_t leave = rows_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= kPivotTolerance) continue;
        const double ratio = rhs(r) / a;
        if (ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && leave < rows_ && basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave == rows_) return false;
      pivot(leave, enter);
    }
    throw SolverError("simplex iteration limit reached");
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Two-phase dense simplex. Redundant equality rows are detected after phase
/// one and dropped. Throws SolverError on infeasibility or unboundedness.
inline LpSolution solve_lp(const LpProblem& problem) {
  problem.validate();
  const std::size_t m = problem.n_rows();
  const std::size_t n = problem.n_vars();
  constexpr double kFeasibility = 1e-9;

  // Columns: n structural, then m artificials.
  detail::Tableau tab(m, n + m);
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = problem.rhs[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign * problem.A[i][j];
    tab.at(i, n + i) = 1.0;
    tab.rhs(i) = sign * problem.rhs[i];
    tab.basis()[i] = n + i;
  }
  // Phase one: minimize the sum of artificials.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < n; ++c) tab.cost(c) -= tab.at(i, c);
    tab.cost(n + m) -= tab.rhs(i);
  }
  tab.optimize(n + m);
  const double infeasibility = -tab.cost(n + m);
  if (infeasibility > kFeasibility) {
    throw SolverError("linear program is infeasible", infeasibility);
  }

  // Drive artificials out of the basis; rows where that is impossible are
  // linear combinations of the others.
  std::vector<bool> redundant(m, false);
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basis()[r] < n) continue;
    std::size_t col = n;
    for (std::size_t c = 0; c < n; ++c) {
      if (std::abs(tab.at(r, c)) > detail::Tableau::kPivotTolerance) {
        col = c;
        break;
      }
    }
    if (col == n) {
      redundant[r] = true;
    } else {
      tab.pivot(r, col);
    }
  }

  // Phase two on the structural columns, minimizing -objective.
  for (std::size_t c = 0; c <= n + m; ++c) tab.cost(c) = 0.0;
  for (std::size_t c = 0; c < n; ++c) tab.cost(c) = -problem.objective[c];
  for (std::size_t r = 0; r < m; ++r) {
    if (redundant[r]) continue;
    const std::size_t bc = tab.basis()[r];
    const double f = tab.cost(bc);
    if (f == 0.0) continue;
    for (std::size_t c = 0; c <= n + m; ++c) tab.cost(c) -= f * tab.at(r, c);
  }
  // Redundant rows are all-zero over structural columns and never pivot.
  if (!tab.optimize(n)) throw SolverError("linear program is unbounded");

  LpSolution out;
  out.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (!redundant[r] && tab.basis()[r] < n) out.x[tab.basis()[r]] = tab.rhs(r);
  }
  for (std::size_t j = 0; j < n; ++j) out.value += problem.objective[j] * out.x[j];
  const double residual = problem.residual(out.x);
  if (residual > kFeasibility) {
    throw SolverError("simplex solution violates constraints", residual);
  }
  return out;
}

/// Variable index of psi[u, o] in the efficiency LP.
inline std::size_t psi_index(std::size_t u, Outcome o) { return 2 * u + static_cast<std::size_t>(index_of(o)); }

/// Upper bound on the long-run average reward: choose a joint urgency/outcome
/// distribution psi whose urgency marginal is stationary under phi, in which
/// exactly half of the interactions are won, maximizing -sum_u u psi[u, yield].
inline LpProblem build_max_eff_lp(const UrgencyProcess& process) {
  const std::size_t n_u = process.size();
  LpProblem lp;
  lp.objective.assign(2 * n_u, 0.0);
  for (std::size_t u = 0; u < n_u; ++u) {
    lp.objective[psi_index(u, Outcome::kYield)] = -static_cast<double>(process.level(u));
  }
  for (std::size_t u = 0; u < n_u; ++u) {
    std::vector<double> row(2 * n_u, 0.0);
    for (Outcome o : kOutcomes) {
      row[psi_index(u, o)] += 1.0;
      for (std::size_t from = 0; from < n_u; ++from) {
        row[psi_index(from, o)] -= process.phi(o, from, u);
      }
    }
    lp.A.push_back(std::move(row));
    lp.rhs.push_back(0.0);
  }
  lp.A.emplace_back(2 * n_u, 1.0);
  lp.rhs.push_back(1.0);
  std::vector<double> half(2 * n_u, 0.0);
  for (std::size_t u = 0; u < n_u; ++u) half[psi_index(u, Outcome::kWin)] = 1.0;
  lp.A.push_back(std::move(half));
  lp.rhs.push_back(0.5);
  return lp;
}

}  // namespace karma
