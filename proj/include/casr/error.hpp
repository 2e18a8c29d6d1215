#pragma once

#include <stdexcept>
#include <string>

namespace casr {

// Base for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Problems with input data: malformed files, invalid values, graph/dataset
// mismatches. Maps to CLI exit code 3.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration values (alpha out of range, unknown test name, ...).
// Maps to CLI exit code 4.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace casr
