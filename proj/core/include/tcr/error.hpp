#pragma once

#include <stdexcept>
#include <string>

namespace tcr {

// Exception hierarchy. The CLI maps each family to an exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or arguments (exit 1).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent data files (exit 2).
class DataError : public Error {
 public:
  using Error::Error;
};

// Rank failures, singular matrices, degenerate fits (exit 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace tcr
