#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace urlr {

// Bad input: malformed files, out-of-range ids, inconsistent dimensions.
// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation could not produce a trustworthy result. Exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(std::size_t lambda_index, double residual)
      : NumericalError("coordinate descent did not converge at lambda index " +
                       std::to_string(lambda_index) + " (max change " +
                       std::to_string(residual) + ")"),
        lambda_index_(lambda_index),
        residual_(residual) {}

  std::size_t lambda_index() const { return lambda_index_; }
  double residual() const { return residual_; }

 private:
  std::size_t lambda_index_;
  double residual_;
};

}  // namespace urlr
