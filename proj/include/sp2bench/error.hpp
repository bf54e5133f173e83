#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sp2bench {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A row needed more stored entries than the matrix width allows.
class OverflowError : public Error {
 public:
  OverflowError(std::size_t row, std::size_t needed, std::size_t m_max)
      : Error("row " + std::to_string(row) + " needs " + std::to_string(needed) +
              " entries but m_max is " + std::to_string(m_max)),
        row_(row), needed_(needed), m_max_(m_max) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t needed() const noexcept { return needed_; }
  std::size_t m_max() const noexcept { return m_max_; }

 private:
  std::size_t row_;
  std::size_t needed_;
  std::size_t m_max_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class AllocationFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed user input (subset strings, Matrix Market files, CSV).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string token)
      : Error(what + ": '" + token + "'"), token_(std::move(token)) {}

  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

class TopologyExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidScale : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidDimension : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class DegenerateGap : public Error {
 public:
  using Error::Error;
};

class DegenerateBounds : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sp2bench
