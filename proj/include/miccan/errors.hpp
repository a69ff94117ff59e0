#pragma once

#include <stdexcept>
#include <string>

namespace miccan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// A mask specification that cannot be realized for the requested grid.
class InfeasibleSpec : public Error {
 public:
  using Error::Error;
};

/// Iterative solver produced a non-finite objective, or training hit a non-finite loss.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable binary container.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

}  // namespace miccan
