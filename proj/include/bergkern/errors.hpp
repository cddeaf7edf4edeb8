#pragma once

#include <stdexcept>
#include <string>

namespace bergkern {

/// Invalid arguments: arity mismatch, parameter out of range, negative modulus.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point lies outside the domain where a closed formula is valid.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The closed V_eta kernel hit a (near) zero denominator.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature ran out of its subdivision budget.
/// Carries the best estimate reached so far.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double partial_value, double partial_error)
      : std::runtime_error(what), partial_value_(partial_value), partial_error_(partial_error) {}

  double partial_value() const noexcept { return partial_value_; }
  double partial_error() const noexcept { return partial_error_; }

 private:
  double partial_value_;
  double partial_error_;
};

}  // namespace bergkern
