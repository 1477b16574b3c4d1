#pragma once

#include <stdexcept>
#include <string>

namespace relab {

/// Base class for all errors raised by the framework.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Matrix / tensor shape mismatch.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Operation called in an invalid order (backward before forward, step after done, ...).
class StateError : public Error {
public:
  using Error::Error;
};

/// Invalid numeric argument (capacity <= 0, kappa <= 0, window <= 0, ...).
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Name not present in a registry; the message lists what is available.
class LookupError : public Error {
public:
  using Error::Error;
};

/// Index or discrete action outside its valid range.
class BoundsError : public Error {
public:
  using Error::Error;
};

/// File missing, unreadable, or truncated.
class FileError : public Error {
public:
  using Error::Error;
};

/// Config document structurally invalid (missing table, non-scalar value, ...).
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Config value or override has the wrong type for its key.
class TypeError : public Error {
public:
  using Error::Error;
};

/// Semantically invalid configuration (incompatible component combination, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Checkpoint cannot be loaded into the current setup (magic, version, agent, shape).
class CompatibilityError : public Error {
public:
  using Error::Error;
};

/// Malformed command line; callers map this to exit code 2.
class UsageError : public Error {
public:
  using Error::Error;
};

}  // namespace relab
