#pragma once

#include <stdexcept>
#include <string>

namespace maczac {

/// Invalid or inconsistent configuration value.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Encoder dimension does not match the phase schedule or the requested path.
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Decoy relation has no real solution (e.g. nu >= mu).
class NoSolutionError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Voltage pulse does not line up with any modulator slot.
class TimingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Requested phases are not reachable with non-negative supply voltages.
class CalibrationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Metric is undefined for the supplied counts (e.g. no clicks at all).
class MetricError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

}  // namespace maczac
