#pragma once

#include <stdexcept>
#include <string>

namespace lmlab {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes or dimensions do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A scalar argument lies outside the operation's domain (p not in (0,1), T <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A structural invariant failed (non-orthonormal basis, non-unitary matrix, unknown id, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized input.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace lmlab
