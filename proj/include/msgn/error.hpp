#pragma once

#include <stdexcept>
#include <string>

namespace msgn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical or numerical parameter lies outside its admissible range.
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

/// Depth touched or crossed zero.
class DegenerateDepthError : public Error {
 public:
  using Error::Error;
};

/// Field lengths disagree with the grid or with each other.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared in a field.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// A quantity lies outside the range where a formula is meaningful.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Requested construction cannot be realised on the given grid/energy budget.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double achievable_min_p0)
      : Error(what), achievable_min_p0_(achievable_min_p0) {}
  double achievable_min_p0() const noexcept { return achievable_min_p0_; }

 private:
  double achievable_min_p0_;
};

/// A Runge-Kutta stage produced non-finite values or non-positive depth.
class StageFailure : public Error {
 public:
  using Error::Error;
};

/// Invariant violated inside the library (should not happen for valid input).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace msgn
