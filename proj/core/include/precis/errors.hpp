#pragma once

#include <stdexcept>
#include <string>

namespace precis {

// Base error. exit_class() distinguishes input/validation problems (1) from
// numerical failures (2); the CLI maps it straight to the process exit code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual int exit_class() const { return 2; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_class() const override { return 1; }
};

struct DimensionMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct NonFiniteInput : ValidationError {
  using ValidationError::ValidationError;
};
struct ZeroVarianceColumn : ValidationError {
  explicit ZeroVarianceColumn(int j)
      : ValidationError("column " + std::to_string(j) + " has all-equal values"),
        column(j) {}
  int column;
};
struct NotSymmetric : ValidationError {
  using ValidationError::ValidationError;
};
struct InvalidAlpha : ValidationError {
  using ValidationError::ValidationError;
};
struct MissingColumn : ValidationError {
  using ValidationError::ValidationError;
};
struct ProvenanceMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct TooLargeForExhaustive : ValidationError {
  using ValidationError::ValidationError;
};
struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

struct NotPositiveDefinite : Error {
  using Error::Error;
};
struct NonPositiveDefiniteInput : Error {
  using Error::Error;
};
struct NonPositiveDiagonal : Error {
  using Error::Error;
};
struct DegenerateResidual : Error {
  using Error::Error;
};
struct SingularCovariance : Error {
  using Error::Error;
};
struct SingularSubBlock : Error {
  using Error::Error;
};
struct NotConverged : Error {
  using Error::Error;
};
struct AllFitsFailed : Error {
  using Error::Error;
};

}  // namespace precis
