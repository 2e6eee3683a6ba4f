#pragma once

#include <stdexcept>
#include <string>

namespace qsa {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-side precondition does not hold (bad parameter range, invalid tag).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Operand dimensions disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Desk-scale size cap exceeded (dense matrices, convolution tables, state spaces).
class CapExceeded : public Error {
 public:
  using Error::Error;
};

// Malformed input read from disk or the command line.
class InputError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace qsa
