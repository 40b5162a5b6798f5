#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace risuav {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario file (syntax, unknown value types).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A parameter violates an invariant. `field()` names the offending key.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Argument outside the domain of a model function (e.g. speed below the hover guard).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace risuav
