#pragma once

#include <stdexcept>
#include <string>

namespace kss {

// Mathematical precondition violated (bad degree, |t| > 1, K > N, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Overlap r too close to +-1: the two-point value covariance is singular.
class SingularOverlapError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A covariance model that should be PSD is not, beyond rounding slack.
class ModelError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Statistical or resolution problems: the answer may be incomplete, not wrong
// by construction (grid saturation, Newton nonconvergence).
class DiagnosticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or serialized input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kss
