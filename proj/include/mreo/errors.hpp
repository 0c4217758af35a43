#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mreo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidBounds : public Error {
 public:
  using Error::Error;
};

class InvalidPermutation : public Error {
 public:
  using Error::Error;
};

/// Raised when an operation needs at least two particles.
class DegenerateEnsemble : public Error {
 public:
  using Error::Error;
};

/// A cost evaluation returned NaN or infinity.
class PoisonedCandidate : public Error {
 public:
  PoisonedCandidate(std::size_t column, long iteration, const std::string& what)
      : Error(what), column_(column), iteration_(iteration) {}

  std::size_t column() const noexcept { return column_; }
  /// Iteration at which the candidate was evaluated, -1 if unknown.
  long iteration() const noexcept { return iteration_; }

 private:
  std::size_t column_;
  long iteration_;
};

class IntegrationBlowup : public Error {
 public:
  IntegrationBlowup(double t, const std::string& what) : Error(what), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidComparison : public Error {
 public:
  using Error::Error;
};

}  // namespace mreo
