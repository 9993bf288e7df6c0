#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ctx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation (mismatched qubit
/// counts, restriction to a set outside the section's domain, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on an input that violates its documented
/// precondition (non-closed Pauli set, a map that is not a splitting, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed model file or CLI source.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// An internal consistency check failed. Raised when a computed object
/// contradicts a proven identity (e.g. a cocycle that is not closed).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Collected violations of a structural check. Empty means valid.
struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string message) { violations.push_back(std::move(message)); }
  void merge(const ValidationReport& other, const std::string& prefix = {}) {
    for (const auto& v : other.violations) violations.push_back(prefix + v);
  }
};

}  // namespace ctx
