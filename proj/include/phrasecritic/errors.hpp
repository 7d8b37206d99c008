#pragma once

#include <stdexcept>
#include <string>

namespace phrasecritic {

// Base for every error raised by the library. `kind()` is a stable
// machine-readable tag used by the CLI error records.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Invalid configuration or argument outside an operation's precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

// A generator could not satisfy its constraints within its retry budget.
class GenerationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "generation"; }
};

// Input that an operation cannot work on (empty scene, no flippable token...).
class InputError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "input"; }
};

// A file that should be read does not exist or cannot be opened.
class MissingFileError : public InputError {
 public:
  using InputError::InputError;
  const char* kind() const noexcept override { return "missing_file"; }
};

// Corrupt or wrong-version file content.
class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

// Non-finite value met during scoring, backprop or training.
class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric"; }
};

}  // namespace phrasecritic
