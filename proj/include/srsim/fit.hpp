// fit.hpp — least-squares fitting backend
//
// Damped least squares (Levenberg-Marquardt) over a residual functor,
// with forward-difference Jacobians unless the caller supplies analytic
// ones. Convergence is declared at 1e-10 relative parameter change.

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace srsim::fit {

struct FitResult {
    std::vector<double> params;
    double residual_norm = 0.0;       // sqrt(sum of squared residuals)
    std::vector<double> covariance;   // row-major p x p, scaled by residual variance
    int iterations = 0;
    bool converged = false;
};

struct FitOptions {
    int max_iterations = 200;
    double param_tol = 1e-10;     // relative parameter change
    double lambda_init = 1e-3;    // initial damping
};

using ResidualFn = std::function<void(std::span<const double> params,
                                      std::vector<double>& residuals)>;
// jacobian[i*np + j] = d r_i / d p_j
using JacobianFn = std::function<void(std::span<const double> params,
                                      std::vector<double>& jacobian)>;

// Throws FitError when damping cannot reduce the residual any further
// before reaching tolerance; the message carries the residual report.
FitResult levenberg_marquardt(const ResidualFn& residual, std::size_t n_residuals,
                              std::vector<double> initial,
                              const JacobianFn& jacobian = nullptr,
                              const FitOptions& options = {});

// Ordinary linear least squares: design is row-major n x p.
std::vector<double> linear_least_squares(std::span<const double> design,
                                         std::span<const double> y, std::size_t n_params);

// Straight-line fit y = slope*x + intercept, returning {slope, intercept, r_squared}.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace srsim::fit
