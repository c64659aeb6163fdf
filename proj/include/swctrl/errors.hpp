#pragma once

#include <stdexcept>
#include <string>

namespace swctrl {

/// Malformed or inconsistent user input. `field()` is a JSON-style path
/// such as "Q[0]" or "A.e1" (empty when no single field is to blame).
class InputError : public std::runtime_error {
 public:
  InputError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Numerical failure of an otherwise valid computation (PSD violation,
/// singular Gramian, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swctrl
