#pragma once

#include <stdexcept>
#include <string>

namespace htile {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, or 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A caller violated an operation's precondition.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A configured size or work limit was exceeded.
class LimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace htile
