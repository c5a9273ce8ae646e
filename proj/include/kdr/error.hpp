#pragma once

#include <stdexcept>
#include <string>

namespace kdr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter lies outside the validity range of its owning type.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// A factorization failed where the mathematics says it cannot; usually
// NaN/Inf in the input.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Retraction of a rank-deficient matrix. The optimizer catches this and
// shrinks the step.
class DegenerateStep : public Error {
 public:
  using Error::Error;
};

class ConstantColumn : public Error {
 public:
  ConstantColumn(std::string const& what, long column)
      : Error(what), column_(column) {}
  [[nodiscard]] long column() const noexcept { return column_; }

 private:
  long column_;
};

class UnsupportedResponse : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string const& what, long line)
      : Error(what), line_(line) {}
  // 1-based line number in the source file, 0 when not tied to a line.
  [[nodiscard]] long line() const noexcept { return line_; }

 private:
  long line_;
};

class BenchAborted : public Error {
 public:
  using Error::Error;
};

}  // namespace kdr
