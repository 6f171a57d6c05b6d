#pragma once

#include <stdexcept>
#include <string>

namespace optresp {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar parameter is outside its admissible range (n = 0, ε ≤ 0, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// An input object is malformed (non-finite values, undeclared support,
/// grid mismatch, unreadable file).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Base for failures of the numerical pipeline proper.
class NumericError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public NumericError {
 public:
  using NumericError::NumericError;
};

class SpectralError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateEigenvalue : public SpectralError {
 public:
  using SpectralError::SpectralError;
};

class EigenvalueNotFound : public SpectralError {
 public:
  using SpectralError::SpectralError;
};

class LinearAlgebraError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A documented precondition of an operation does not hold on the given data.
class PreconditionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class InfeasibleError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The optimisation objective vanishes on the feasible set.
class DegenerateObjective : public NumericError {
 public:
  using NumericError::NumericError;
};

class StepTooLarge : public NumericError {
 public:
  StepTooLarge(const std::string& what, double max_delta)
      : NumericError(what), max_delta_(max_delta) {}

  double max_admissible_delta() const noexcept { return max_delta_; }

 private:
  double max_delta_;
};

}  // namespace optresp
