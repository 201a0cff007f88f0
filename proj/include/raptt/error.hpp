#pragma once

#include <stdexcept>
#include <string>

namespace raptt {

// Base of everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A factorization that should succeed with probability one did not
// (duplicated rows, constant data, ...).
class NumericalDegeneracy : public Error {
 public:
  using Error::Error;
};

// Statistic is not defined for this input, e.g. classical T^2 with p >= n.
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

// Null calibration was built for a different design than the one tested.
class CalibrationMismatch : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace raptt
