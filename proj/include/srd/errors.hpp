#pragma once

#include <stdexcept>
#include <string>

namespace srd {

/// Input rejected before any computation (bad config field, precondition).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A Gaussian factor a_j |lambda_j| vanishes, so the invariant law is undefined.
class DegenerateModeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Truncation or search did not converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientSamplesError : public std::runtime_error {
 public:
  InsufficientSamplesError(const std::string& what, double effective, double required)
      : std::runtime_error(what), effective_samples(effective), required_samples(required) {}
  double effective_samples;
  double required_samples;
};

}  // namespace srd
