#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nykrls {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: bad shapes, non-finite values, invalid parameter ranges.
class InputError : public Error {
 public:
  using Error::Error;
};

// Malformed experiment configuration (CLI layer).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed dataset files: ragged rows, non-numeric fields, empty input.
class DataError : public Error {
 public:
  using Error::Error;
};

// A dense n-by-n operation was requested above the configured size cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Cholesky pivot failure; `pivot` is the zero-based index of the failing pivot.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& msg, std::ptrdiff_t pivot_index)
      : Error(msg), pivot(pivot_index) {}
  std::ptrdiff_t pivot;
};

// Rank-one downdate would destroy positive definiteness; `column` is the
// zero-based column at which the hyperbolic rotation broke down.
class DowndateFailure : public Error {
 public:
  DowndateFailure(const std::string& msg, std::ptrdiff_t failed_column)
      : Error(msg), column(failed_column) {}
  std::ptrdiff_t column;
};

}  // namespace nykrls
