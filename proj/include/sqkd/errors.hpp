#pragma once

#include <stdexcept>
#include <string>

namespace sqkd {

// Base for all library errors so callers can catch everything from this
// library in one handler while still letting std::exception work.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operands (state vectors, matrices, ensembles) have incompatible or
// invalid dimensions.
struct DimensionMismatch : Error {
  using Error::Error;
};

// A state, matrix or ensemble violates a structural invariant
// (normalization, unitarity, hermiticity, unit trace).
struct StateError : Error {
  using Error::Error;
};

// A projective measurement was asked to collapse onto a component with
// numerically zero weight.
struct DegenerateState : Error {
  using Error::Error;
};

// A probability ensemble does not form a distribution (negative weight or
// weights that do not sum to one).
struct InvalidDistribution : Error {
  using Error::Error;
};

// Bob's random SIFT/CTRL choices left too few (Zp,Zs) SIFT rounds to fill
// both the error-check subset and the raw key. Rerun with a larger delta.
struct InsufficientRounds : Error {
  using Error::Error;
};

// A user-supplied attack description file failed validation.
struct AttackFileError : Error {
  using Error::Error;
};

}  // namespace sqkd
