#pragma once

#include <stdexcept>
#include <string>

namespace qio {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input text (bad FCIDUMP header, bad amplitude line, ...).
struct ParseError : Error {
  explicit ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_number(line) {}
  long line_number;
};

/// Orbital index outside the declared range.
struct IndexError : Error {
  using Error::Error;
};

/// Non-finite or otherwise unusable numeric value.
struct ValueError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// Basis matrix is not orthogonal within tolerance.
struct BasisError : Error {
  using Error::Error;
};

/// Iterative solver failed to reach its residual/gradient threshold.
struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& what, double residual = 0.0)
      : Error(what), best_residual(residual) {}
  double best_residual;
};

/// Requested problem size exceeds a configured cap.
struct CapacityError : Error {
  using Error::Error;
};

/// Reference determinant weight |c0| fell below the usable threshold.
struct ReferenceDegeneracyError : Error {
  using Error::Error;
};

struct MissingDataError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

/// A reduced-density quantity is negative beyond numerical tolerance.
struct PositivityError : Error {
  using Error::Error;
};

/// Probability-like vector does not sum to one within tolerance.
struct NormalizationError : Error {
  using Error::Error;
};

/// Orbital partition is overlapping or incomplete.
struct PartitionError : Error {
  using Error::Error;
};

/// Non-finite number produced during optimization.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace qio
