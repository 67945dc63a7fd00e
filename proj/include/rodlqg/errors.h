#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rodlqg {

/// Raised when a problem description violates one of its invariants
/// (bad placement, non-SPD weight, missing sensors, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver its result
/// (uncontrollable mode, Newton iteration that does not converge, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what,
                          std::vector<double> residual_history = {})
      : std::runtime_error(what),
        residual_history_(std::move(residual_history)) {}

  const std::vector<double>& residual_history() const {
    return residual_history_;
  }

 private:
  std::vector<double> residual_history_;
};

}  // namespace rodlqg
