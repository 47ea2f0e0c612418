#pragma once

#include <stdexcept>
#include <string>

namespace stylo {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration values (thresholds, sizes, hyperparameters).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data that violates a precondition: missing ids, short plays,
/// malformed files.
class DataError : public Error {
public:
    using Error::Error;
};

} // namespace stylo
