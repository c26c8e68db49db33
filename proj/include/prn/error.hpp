#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace prn {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or mismatched inputs that are not text-format problems
// (dimension mismatch, map of the wrong size, non-monic polynomial, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A configured enumeration / expansion cap would be exceeded.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t required, std::size_t cap)
      : Error(what + " (requires " + std::to_string(required) + ", cap " + std::to_string(cap) + ")"),
        required_(required),
        cap_(cap) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t required_;
  std::size_t cap_;
};

// Iterative numerical procedure did not settle.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Text input error; line and column are 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, std::string message)
      : Error(format(source, line, column, message)),
        source_(std::move(source)),
        line_(line),
        column_(column),
        message_(std::move(message)) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string format(const std::string& source, std::size_t line, std::size_t column,
                            const std::string& message) {
    std::string out = source;
    if (line > 0) {
      out += ":" + std::to_string(line);
      if (column > 0) out += ":" + std::to_string(column);
    }
    return out + ": " + message;
  }

  std::string source_;
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

}  // namespace prn
