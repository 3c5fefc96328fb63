#pragma once

#include <stdexcept>
#include <string>

#include "hdsgd/linalg.hpp"

namespace hdsgd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or parameters; line is 0 when not from a file.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public Error {
 public:
  using Error::Error;
};

// Overlap left the model's domain; carries the offending matrix.
class DomainExit : public Error {
 public:
  DomainExit(const std::string& msg, SmallMat b) : Error(msg), b_(std::move(b)) {}
  const SmallMat& overlap() const { return b_; }

 private:
  SmallMat b_;
};

class NumericError : public Error {
 public:
  NumericError(const std::string& msg, double last_good_t)
      : Error(msg + " (last good t=" + std::to_string(last_good_t) + ")"), t_(last_good_t) {}
  double last_good_t() const { return t_; }

 private:
  double t_;
};

}  // namespace hdsgd
