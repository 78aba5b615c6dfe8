#pragma once

#include <stdexcept>
#include <string>

namespace ringsync {

/// Bad input to a numerical routine (non-finite value, wrong size, out-of-range parameter).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Winding number requested for a state with a phase difference at the +pi boundary.
class IllDefinedWinding : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Statistical routine handed data with no usable spread (zero variance, singular design).
class DegenerateData : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Experiment configuration violates its schema. `path()` points at the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace ringsync
