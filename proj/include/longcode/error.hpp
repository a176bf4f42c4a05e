#pragma once

#include <stdexcept>
#include <string>

namespace longcode {

// Base for every error raised by the library. The C API maps each subclass
// onto a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An index (token id, row, class) is out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration; a usage error at the CLI.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed file content (corpus line, manifest, vocabulary).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced by a forward op on finite input (debug builds).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace longcode
