#pragma once

#include <stdexcept>
#include <string>

namespace chsim {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad parameter values, malformed config documents,
/// inconsistent grid/shape combinations. CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A time step produced a non-finite state. CLI exit code 3.
class InstabilityError : public Error {
public:
    InstabilityError(long step, double max_abs_u)
        : Error("non-finite state after step " + std::to_string(step) +
                " (max |u| = " + std::to_string(max_abs_u) + ")"),
          step_(step),
          max_abs_u_(max_abs_u) {}

    long step() const { return step_; }
    double max_abs_u() const { return max_abs_u_; }

private:
    long step_;
    double max_abs_u_;
};

/// Filesystem failure while writing or reading run outputs. CLI exit code 4.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace chsim
