#pragma once

#include <stdexcept>
#include <string>

namespace melast {

/// Bad user input: malformed config, invalid grid sizes, unknown keys.
/// Maps to process exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated runtime precondition on otherwise well-formed data
/// (point on a boundary polyline, inadmissible state, time out of range).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown: solver non-convergence, optimizer failure past
/// the bisection budget. Maps to process exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace melast
