#pragma once

#include <stdexcept>
#include <string>

namespace levsense {

/// Input outside the domain of an operation (non-positive mass, zero height, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical procedure failed to converge or became unstable.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file, config, or command-line input.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace levsense
