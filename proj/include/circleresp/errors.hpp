#pragma once

#include <stdexcept>
#include <string>

namespace circleresp {

// Scenario/config file problems: unknown keys, bad ranges, malformed syntax.
// The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Perturbation family leaves the diffeomorphism regime (min derivative of
// D_delta not positive on the admissible delta range), or |delta| > delta_max.
struct AdmissibilityError : std::runtime_error {
    explicit AdmissibilityError(const std::string& what) : std::runtime_error(what) {}
};

// Map is not uniformly expanding (min |T'| <= 1). Deterministic response
// scenarios refuse to run; noisy scenarios do not need expansion.
struct ExpansionError : std::runtime_error {
    explicit ExpansionError(const std::string& what) : std::runtime_error(what) {}
};

// Linear-algebra failures that should abort a scenario loudly: singular
// resolvent block, stationary solve residual above tolerance, power-iteration
// non-convergence.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace circleresp
