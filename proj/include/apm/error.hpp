#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apm {

// Raised for inputs that are well-formed but violate a domain rule
// (unreachable target, oversized enumeration, bad friend set, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the edge-list and id-list readers; carries the 1-based line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace apm
