#pragma once

#include <stdexcept>
#include <string>

namespace qsat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed parameters, schema violations, broken invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. The message carries the field path or line.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Request exceeds a configured size cap (qubit count, enumeration budget).
class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A measure-zero numerical degeneracy: singular transfer matrix,
/// degenerate loop eigenvalues, vanishing contraction. Callers running
/// sweeps are expected to re-draw rather than abort.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

}  // namespace qsat
