#pragma once

#include <stdexcept>
#include <string>

namespace stlisa {

/// Base for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, inconsistent tables, invalid configuration.
/// The CLI maps these to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Failure while computing: degenerate statistics, I/O trouble mid-run.
/// The CLI maps these to exit code 2.
class ComputeError : public Error {
 public:
  using Error::Error;
};

}  // namespace stlisa
