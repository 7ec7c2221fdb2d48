#pragma once

#include <stdexcept>
#include <string>

namespace phlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid inputs: bad map specs, violated preconditions, malformed configs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-convergence, budget exhaustion, guards tripping on truncated series.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NewtonFailure : public NumericalError {
 public:
  NewtonFailure(int branch, double residual)
      : NumericalError("Newton refinement failed on inverse branch " + std::to_string(branch) +
                       " (residual " + std::to_string(residual) + ")"),
        branch_(branch),
        residual_(residual) {}
  int branch() const { return branch_; }
  double residual() const { return residual_; }

 private:
  int branch_;
  double residual_;
};

}  // namespace phlab
