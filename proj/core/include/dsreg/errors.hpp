#pragma once

#include <stdexcept>
#include <string>

namespace dsreg {

// Bad file contents (volume headers, landmark files, ...).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration (unknown keys, unparsable values, invalid parameters).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value encountered during optimization.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace dsreg
