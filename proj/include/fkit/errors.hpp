#pragma once

#include <stdexcept>
#include <string>

namespace fkit {

/// Enumeration, sampling or truncation budget exceeded.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a structural requirement (graph admissibility, degrees, arities).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two configuration points coincide (or a point sits on a forbidden locus).
class DegenerateConfiguration : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed text or JSON input.
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fkit
