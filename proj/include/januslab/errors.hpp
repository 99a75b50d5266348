#pragma once

#include <stdexcept>
#include <string>

namespace januslab {

// Precondition violations on arguments (shapes, ranges, non-finite inputs).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wrong magic bytes, unsupported version or an inconsistent header.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The payload ended before the header said it would.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Raised when a gradient or score turns NaN/inf during optimization.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace januslab
