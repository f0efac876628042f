#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace valq {

/// Invalid mathematical input (square discriminant, a = 0, Im(tau) <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed textual input (surd, continued fraction, form, CLI values).
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponent overflow or underflow in the multiprecision layer.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Quadrature failed to reach the requested tolerance within the node budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::size_t nodes_used)
      : std::runtime_error(what), nodes_used_(nodes_used) {}
  std::size_t nodes_used() const noexcept { return nodes_used_; }

 private:
  std::size_t nodes_used_;
};

/// Request exceeds a configured resource limit (depth, discriminant bound, precision).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace valq
