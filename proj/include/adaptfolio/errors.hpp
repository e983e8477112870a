#pragma once

#include <stdexcept>
#include <string>

namespace adaptfolio {

/// Invalid experiment configuration or precondition on run parameters.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files, failed alignment, or out-of-domain data values.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value lies outside the mathematical domain of an operation
/// (non-positive price, zero maturity variance, empty curve side).
class DomainError : public DataError {
public:
    using DataError::DataError;
};

/// A computation tried to read an observation dated after its decision time.
class LookAheadError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace adaptfolio
