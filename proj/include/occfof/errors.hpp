#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace occfof {

// Argument outside the mathematical domain of an operation (z out of range,
// negative weights, empty point sets, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Mismatched dimensions between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text or binary input. `location` is a 1-based line number for
// text formats and a byte offset for binary ones.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : std::runtime_error(what), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

// Input mesh violates a structural precondition (not watertight, ...).
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace occfof
