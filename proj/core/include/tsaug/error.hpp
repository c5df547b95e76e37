#pragma once

#include <stdexcept>
#include <string>

namespace tsaug {

// Raised when an input violates a documented precondition (bad shape, range,
// malformed file). The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a computation produces a non-finite or undefined value (NaN loss,
// zero-accuracy ratio). The CLI maps it to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsaug
