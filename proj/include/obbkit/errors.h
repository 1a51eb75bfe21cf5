#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace obb {

// Base for all data-level failures raised while reading or processing
// annotation and detection files. Contract violations on the numeric API
// (degenerate boxes, thresholds out of range) use std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. line() is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A required field is missing or holds an invalid value.
class FieldError : public Error {
 public:
  using Error::Error;
};

// Object class name outside {gun, pistol}.
class ClassError : public Error {
 public:
  using Error::Error;
};

// Numeric value outside its permitted range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Structural problem: missing CSV header, output name collision, ...
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inputs that are individually valid but inconsistent with each other.
class InputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace obb
