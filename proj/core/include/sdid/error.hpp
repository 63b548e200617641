#pragma once

#include <stdexcept>
#include <string>

namespace sdid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a dataset invariant (duplicates, missing levels, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A computation that cannot be carried out on otherwise valid data
/// (rank-deficient design, undefined variance, too many failed replicates).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdid
