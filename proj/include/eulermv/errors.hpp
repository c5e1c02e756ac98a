#pragma once

#include <stdexcept>
#include <string>

namespace eulermv {

// Invalid run configuration (bad grid, violated constraint, unknown key).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thermodynamic evaluation outside the admissible domain (rho <= 0 etc.).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative solver failure; carries the final residual in the message.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// A time step produced an inadmissible state (density under the floor).
// The trajectory driver catches this and retries with a smaller step.
struct StepRejection : std::runtime_error {
    explicit StepRejection(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace eulermv
