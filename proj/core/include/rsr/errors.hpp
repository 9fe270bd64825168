// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace rsr {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation precondition (bad index, used group, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Object is in the wrong state for the request (e.g. missing gradient).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Zero-norm vector where a direction is required.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered; training diverged.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Anything wrong with input files or configuration.
class DataError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public DataError {
 public:
  using DataError::DataError;
};

class TruncatedError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class LabelMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class SplitOverlapError : public DataError {
 public:
  using DataError::DataError;
};

class DuplicateClassError : public DataError {
 public:
  using DataError::DataError;
};

/// A class id referenced by one file is absent from another.
class UnknownClassError : public DataError {
 public:
  using DataError::DataError;
};

/// A per-type invariant failed (zero attribute row, zero-size shape, ...).
class InvariantError : public DataError {
 public:
  using DataError::DataError;
};

/// Config validation failure; `key()` names the offending entry.
class ConfigError : public DataError {
 public:
  ConfigError(std::string key, const std::string& what)
      : DataError("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace rsr
