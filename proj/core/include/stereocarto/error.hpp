#pragma once

#include <stdexcept>
#include <string>

namespace stereocarto {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user-facing configuration: scene documents, CLI options, band
/// mappings. The CLI maps this to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or unsupported audio file. Messages name the offending
/// header field.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace stereocarto
