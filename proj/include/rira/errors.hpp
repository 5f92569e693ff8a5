#pragma once

#include <stdexcept>
#include <string>

namespace rira {

/// Mismatched or out-of-range operand dimensions.
struct InvalidDimension : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A parameter outside its admissible range (e.g. zeta > sketch rows).
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The embedding cannot hold more columns: a d-row sketch supports at
/// most d sketch-orthonormal vectors.
struct SketchCapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported input file.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An iterative kernel exceeded its sweep budget.
struct IterationLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rira
