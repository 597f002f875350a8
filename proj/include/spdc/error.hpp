#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

/// Argument outside the domain of a physical model (evanescent wave,
/// wavelength outside a dispersion fit, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A Gaussian integral whose quadratic form has no positive definite real
/// part.
class IntegrabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a documented precondition (mismatched grids, unnormalized
/// input where a normalized one is required, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid user configuration. `field` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Object in a state that does not admit the requested operation
/// (normalizing a matrix with non-positive trace, ...).
class InvalidStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failed numerical procedure (no bracket for a root, empty integration
/// window, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spdc
