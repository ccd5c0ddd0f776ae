#pragma once
/// @file errors.hpp
/// @brief Exception types raised by the library.

#include <stdexcept>
#include <string>

namespace sbshell {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid spline data or an operation outside its valid domain.
struct SplineError : Error {
    using Error::Error;
};

/// Degenerate or inconsistent geometry (non-positive Jacobian, mismatched
/// interfaces, empty kernel after partitioning).
struct GeometryError : Error {
    using Error::Error;
};

/// Numerical failure in assembly or solve.
struct SolverError : Error {
    using Error::Error;
};

/// Malformed input files or options.
struct InputError : Error {
    using Error::Error;
};

}  // namespace sbshell
