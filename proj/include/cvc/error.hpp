#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cvc {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters: fold counts, levels, replicate counts, flag values.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Malformed or unusable input data.
class DataError : public Error {
public:
  using Error::Error;
};

/// CSV parse failure, 1-based row and column of the offending cell.
class ParseError : public DataError {
public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : DataError("row " + std::to_string(row) + ", column " +
                  std::to_string(column) + ": " + what),
        row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t row_;
  std::size_t column_;
};

/// A focal candidate has nothing to be compared against (M < 2).
class NoCompetitorsError : public Error {
public:
  using Error::Error;
};

/// Input whose empirical spread is zero where a positive one is required.
class DegenerateInputError : public Error {
public:
  using Error::Error;
};

/// Numerical failure while fitting one candidate.
class FitError : public Error {
public:
  FitError(int candidate, const std::string& what)
      : Error("candidate " + std::to_string(candidate) + ": " + what),
        candidate_(candidate) {}

  int candidate() const noexcept { return candidate_; }

private:
  int candidate_;
};

/// Selection requested from an empty confidence set.
class EmptySetError : public Error {
public:
  using Error::Error;
};

}  // namespace cvc
