#pragma once

#include <stdexcept>
#include <string>

namespace ccp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model, performance config, or distribution table failed to load.
class ModelLoadError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (unknown keys, bad values, missing files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data is unreadable or contains nothing usable.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an operation's arguments does not hold.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A rate or statistic is undefined for the given data (zero denominator).
class UndefinedRateError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An internal invariant was violated; indicates a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace ccp
