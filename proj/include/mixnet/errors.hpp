#pragma once

#include <stdexcept>
#include <string>

namespace mixnet {

/// Malformed input text (scenario files, design strings, overrides).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulation produced a state outside the model's admissible region.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mixnet
