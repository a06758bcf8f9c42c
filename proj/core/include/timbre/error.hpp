#pragma once

#include <stdexcept>
#include <string>

namespace timbre {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or inconsistent settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input bytes (WAV files, model files, config text).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input data that violates an operation's preconditions.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace timbre
