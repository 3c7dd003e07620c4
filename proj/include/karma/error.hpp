#pragma once

#include <stdexcept>
#include <string>

namespace karma {

/// Invalid model or solver parameter. `field()` names the offending input.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A numerical routine failed to reach its contract (non-convergence,
/// infeasible or unbounded LP).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace karma
