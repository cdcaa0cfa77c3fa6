#pragma once

#include <stdexcept>
#include <string>

namespace entpulse {

// Base class for every error raised by the library. Callers that only care
// about "something physical or numerical went wrong" can catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

// chi1 == 0: the squeezing ratio r = |chi2/chi1| is undefined.
class DegenerateCoupling : public Error {
public:
    using Error::Error;
};

// |chi2| <= |chi1|: the dynamics are not periodic, so T_pi does not exist.
class UndefinedPeriod : public Error {
public:
    using Error::Error;
};

class InfiniteSqueezing : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Covariance matrix violates the uncertainty relation.
class InvalidState : public Error {
public:
    using Error::Error;
};

class TruncationError : public Error {
public:
    using Error::Error;
};

class ProtocolUndefined : public Error {
public:
    using Error::Error;
};

// A hard inequality of the validity regime fails and the run was not forced.
class RegimeViolation : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& message, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    // 1-based line number in the config file, or 0 when not tied to a line.
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace entpulse
