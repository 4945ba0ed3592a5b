#pragma once

#include <stdexcept>
#include <string>

namespace palmseg {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Tensor or image extents do not line up (channel mismatch, odd size, ...).
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A parameter value is outside its documented range.
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// An architecture or run configuration is internally inconsistent.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Dataset or file contents cannot be used.
class DataError : public Error {
public:
  using Error::Error;
};

/// A numeric computation failed (non-finite values, failed verification).
class NumericError : public Error {
public:
  using Error::Error;
};

/// Checkpoint container fault. The fault kind stays inspectable so callers
/// can distinguish a corrupt header from a short read or a bad shape table.
class CheckpointError : public DataError {
public:
  enum class Fault { BadHeader, ShapeMismatch, Truncated, TrailingData };

  CheckpointError(Fault fault, const std::string& message)
      : DataError(message), fault_(fault) {}

  Fault fault() const { return fault_; }

private:
  Fault fault_;
};

}  // namespace palmseg
