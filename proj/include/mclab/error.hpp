#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mclab {

/// Raised when an input violates a documented precondition.
///
/// `constraint()` carries a short machine-friendly name of the violated rule
/// (e.g. "support_margin", "lambda_upper_bound"); `what()` adds the details.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string constraint, const std::string& detail)
      : std::invalid_argument(constraint + ": " + detail),
        constraint_(std::move(constraint)) {}

  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

/// Raised when a computed quantity breaks an invariant that must hold by
/// construction (e.g. a zero right-hand side with a nonzero left-hand side).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mclab
