#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace motifbench {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value violates a precondition or a type invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed text input. `line` is 1-based; 0 means "not line-oriented".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  // Same error with `prefix` in front of the message; the line is kept.
  ParseError(const std::string& prefix, const ParseError& inner)
      : Error(prefix + inner.what()), line_(inner.line_) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace motifbench
