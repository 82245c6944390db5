#pragma once

#include <stdexcept>
#include <string>

namespace riskrl {

/// Invalid model, parameters, or file contents. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solver failure (max iterations, step-size underflow, no
/// admissible radius). CLI maps this to exit code 3.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Mathematical domain violations: nondifferentiable point, unbounded
/// derivative, failed root bracket, absolute-continuity violation.
class MathError : public std::runtime_error {
public:
    explicit MathError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace riskrl
