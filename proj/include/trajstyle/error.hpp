#pragma once

#include <stdexcept>
#include <string>

namespace trajstyle {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Backward pass invoked without a matching train-mode forward cache.
class CacheError : public Error {
 public:
  using Error::Error;
};

class ValueError : public Error {
 public:
  using Error::Error;
};

// Operation not allowed in the object's current state (closed session,
// underfilled replay buffer, untrained model).
class StateError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace trajstyle
