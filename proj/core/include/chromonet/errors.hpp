#pragma once

#include <stdexcept>
#include <string>

namespace chromonet {

// Raised for inputs that violate a documented precondition.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Interior sites could not be placed under the minimum-distance constraint.
class PackingInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical solver failed (singular system, divergence, step underflow, ...).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace chromonet
