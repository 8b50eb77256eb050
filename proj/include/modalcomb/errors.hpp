#pragma once

#include <stdexcept>
#include <string>

namespace modalcomb {

/// Invalid run configuration (bad flag value, malformed config file, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent input data (CSV parse failures, short panels, ...).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// MCMC could not be run to completion (initialization failure, ...).
struct SamplerError : std::runtime_error {
    explicit SamplerError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A fold attempted to read ground truth beyond its visibility horizon.
/// Always a hard error, never downgraded to a warning.
struct LeakageError : std::logic_error {
    explicit LeakageError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace modalcomb
