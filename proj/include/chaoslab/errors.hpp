#pragma once

#include <stdexcept>
#include <string>

namespace chaoslab {

/// Process exit codes used by the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2, ///< bad config / arguments / preconditions
  kExitNumerical = 3,  ///< CFL violation, mass drift, non-finite values
  kExitIo = 4,         ///< file read/write failures
};

/// Violated precondition or invalid configuration (exit code 2).
struct ValidationError : std::runtime_error {
  std::string field;
  ValidationError(std::string field_, const std::string& msg)
      : std::runtime_error(msg), field(std::move(field_)) {}
};

/// Numerical failure during a run (exit code 3).
struct NumericalError : std::runtime_error {
  std::string field;
  NumericalError(std::string field_, const std::string& msg)
      : std::runtime_error(msg), field(std::move(field_)) {}
};

/// File I/O failure (exit code 4).
struct IoError : std::runtime_error {
  std::string field;
  IoError(std::string field_, const std::string& msg)
      : std::runtime_error(msg), field(std::move(field_)) {}
};

} // namespace chaoslab
