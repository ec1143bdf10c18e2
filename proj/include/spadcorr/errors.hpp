#pragma once

#include <stdexcept>
#include <string>

namespace spadcorr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameters (bad probabilities, asymmetric ROI...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A coordinate fell outside the sensor or the region of interest.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the object's state or mode.
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// Numerical domain violation (occupancy >= 1, singular fit, no peak...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A request exceeding the configured memory budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  enum class Kind { Open, MagicMismatch, Truncated, BitDepthMismatch, Format, Write };

  IoError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace spadcorr
