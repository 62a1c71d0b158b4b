#ifndef WCM_ERRORS_HPP
#define WCM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wcm {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or block structures do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter lies outside its admissible range (alpha, M, k, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must have full (row or column) rank does not.
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity in an input that must be finite.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or configuration contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace wcm

#endif  // WCM_ERRORS_HPP
