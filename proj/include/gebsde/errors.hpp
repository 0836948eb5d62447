#pragma once

#include <stdexcept>
#include <string>

namespace gebsde {

/// Malformed configuration or expression text (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Expression evaluation failure (division by zero, non-finite result).
class EvalError : public std::runtime_error {
public:
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

/// Solver-level failure: CFL violation, blow-up, non-convergence,
/// infeasible weighting (CLI exit code 2).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gebsde
