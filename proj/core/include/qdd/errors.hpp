#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdd {

// Raised when a caller breaks an operation's precondition, or when a
// package-internal bound (cache capacity, refcount floor) is violated.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Division by a (near-)zero complex value.
class ArithmeticError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
 public:
  /// Line 0 means the error is not tied to a line (e.g. unreadable file).
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qdd
