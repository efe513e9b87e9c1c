#pragma once

#include <stdexcept>
#include <string>

namespace hypersub {

// Bad caller input: wrong degree, wrong vector count, malformed config.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Point outside the domain of a field, chart or manifold.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Evaluation at (or numerically at) a characteristic point.
struct SingularityError : std::domain_error {
  using std::domain_error::domain_error;
};

struct UnsupportedError : std::logic_error {
  using std::logic_error::logic_error;
};

// Breakdown of a numerical procedure, e.g. Gram-Schmidt on a dependent set.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Output directory or file could not be written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hypersub
