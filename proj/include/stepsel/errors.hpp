#pragma once

// Error types used across the library.
//
// Out-of-domain parameters and observations raise std::domain_error, bad
// arguments raise std::invalid_argument and bad indices std::out_of_range.
// The types below cover the remaining failure classes.

#include <stdexcept>
#include <string>

namespace stepsel {

/// Malformed structured input (JSON document, CSV file).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input whose content violates a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to converge.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stepsel
