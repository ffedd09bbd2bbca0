#pragma once

#include <stdexcept>
#include <string>

namespace wpfm {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input vector too close to the origin to decompose, or otherwise unusable.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// A radial update drove the radius to or below the minimum representable value.
class RadialUnderflow : public Error {
 public:
  using Error::Error;
};

// Endpoint directions are antipodal; the connecting arc is not unique.
class AntipodalEndpoints : public Error {
 public:
  using Error::Error;
};

// Operation requested on a path of the wrong kind.
class WrongKind : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to reach its tolerance within the iteration cap.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

// Vector arguments disagree in dimension.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Backward pass given a cache recorded before a parameter update.
class StaleCache : public Error {
 public:
  using Error::Error;
};

// Training loss became NaN or infinite.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

// Integration state became NaN or infinite.
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (bad magic, version, or field).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem operation failed.
class IoError : public Error {
 public:
  using Error::Error;
};

// A statistics group contains no samples.
class EmptyGroup : public Error {
 public:
  using Error::Error;
};

// Rejection sampling could not place mutually separated class means.
class SeparationFailure : public Error {
 public:
  using Error::Error;
};

// Configuration file rejected (unknown key, bad type, or bad value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wpfm
