#pragma once

#include <stdexcept>
#include <string>

namespace qcorr {

// Error taxonomy mirrors the CLI exit-code contract:
//   ValidationError -> exit 2, EngineError -> exit 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, invalid specs, mismatched arguments.
struct ValidationError : Error {
  explicit ValidationError(const std::string& what, std::string category = "validation")
      : Error(what), category(std::move(category)) {}
  std::string category;
};

// Failure while running: step-size underflow, truncation overflow, divergence.
struct EngineError : Error {
  using Error::Error;
};

// A correlator denominator fell below the floor.
struct UndefinedValueError : Error {
  using Error::Error;
};

}  // namespace qcorr
