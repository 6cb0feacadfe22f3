#pragma once

#include <stdexcept>
#include <string>

namespace crs {

/// Malformed or inconsistent user input (files, flags, argument domains).
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (optimizer did not converge, degenerate data).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crs
