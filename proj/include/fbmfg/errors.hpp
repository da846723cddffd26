#pragma once

#include <stdexcept>
#include <string>

namespace fbmfg {

/// Caller broke a precondition (mismatched sizes, invalid configuration).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Floating point trouble: overflow, breakdown of an inner solver.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An outer iteration produced non-finite values.
class DivergedError : public NumericalError {
 public:
  DivergedError(const std::string& what, int iteration)
      : NumericalError(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// An inner iteration hit its cap before meeting its tolerance.
class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, double last_change,
                      double last_residual)
      : NumericalError(what),
        last_change_(last_change),
        last_residual_(last_residual) {}
  double last_change() const noexcept { return last_change_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_change_;
  double last_residual_;
};

}  // namespace fbmfg
