#pragma once

#include <stdexcept>
#include <string>

namespace wavelock {

/// Invalid user input or configuration. The CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure inside the numerics (singular model, degenerate geometry,
/// solver breakdown). The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sensor and a source coincide; the attenuation model is singular there.
class DegenerateGeometryError : public NumericalError {
 public:
  DegenerateGeometryError(int sensor, int source)
      : NumericalError("degenerate geometry: sensor " + std::to_string(sensor) +
                       " coincides with source " + std::to_string(source)),
        sensor_(sensor),
        source_(source) {}

  int sensor() const noexcept { return sensor_; }
  int source() const noexcept { return source_; }

 private:
  int sensor_;
  int source_;
};

/// The combined steering matrix lost column rank at some frequency bin.
class SingularModelError : public NumericalError {
 public:
  explicit SingularModelError(int bin)
      : NumericalError("singular model: steering matrix is rank deficient at bin " +
                       std::to_string(bin)),
        bin_(bin) {}

  int bin() const noexcept { return bin_; }

 private:
  int bin_;
};

/// Argument outside the mathematical domain of a function (e.g. rho <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace wavelock
