// errors.hpp — exception types shared across modules

#pragma once

#include <stdexcept>
#include <string>

namespace srsim {

// Adaptive quadrature or series evaluation failed to reach tolerance.
struct NumericalToleranceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Integrator step size underflowed; carries the time of failure.
struct StiffnessError : std::runtime_error {
    double time_of_failure;
    StiffnessError(const std::string& what, double t)
        : std::runtime_error(what), time_of_failure(t) {}
};

// Nonlinear fit did not converge; message carries the residual report.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config file problem; message names the field and line.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace srsim
