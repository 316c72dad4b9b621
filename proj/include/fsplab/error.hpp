#pragma once

#include <stdexcept>
#include <string>

namespace fsp {

/// Precondition or parameter-range violation on caller input.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// NaN/Inf, blow-up, or a solver that failed to converge.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when the support of a run comes within the guard margin of the box.
class BoundarySentinelError : public NumericalFailure {
public:
  using NumericalFailure::NumericalFailure;
};

/// Inner iteration cap exceeded; carries the last residual.
class IterationLimitError : public NumericalFailure {
public:
  IterationLimitError(const std::string& what, double last_residual)
      : NumericalFailure(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

private:
  double last_residual_;
};

/// An experiment's built-in verification check failed.
class VerificationFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace fsp
