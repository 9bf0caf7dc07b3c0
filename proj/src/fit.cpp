#include "srsim/fit.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "srsim/errors.hpp"

namespace srsim::fit {

namespace {

// Solve the symmetric positive-definite system A x = b in place via
// Cholesky; returns false if A is not positive definite.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k)
                s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (s <= 0.0)
                    return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k)
            s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k)
            s -= a[k * n + ii] * b[k];
        b[ii] = s / a[ii * n + ii];
    }
    return true;
}

// Invert SPD matrix via Cholesky column solves; returns empty on failure.
std::vector<double> spd_inverse(std::vector<double> a, std::size_t n) {
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<double> rhs(n, 0.0);
        rhs[col] = 1.0;
        std::vector<double> acopy = a;
        if (!cholesky_solve(acopy, rhs, n))
            return {};
        for (std::size_t row = 0; row < n; ++row)
            inv[row * n + col] = rhs[row];
    }
    return inv;
}

void numeric_jacobian(const ResidualFn& residual, std::span<const double> params,
                      const std::vector<double>& r0, std::vector<double>& jac) {
    const std::size_t np = params.size();
    const std::size_t nr = r0.size();
    std::vector<double> p(params.begin(), params.end());
    std::vector<double> r1;
    jac.assign(nr * np, 0.0);
    for (std::size_t j = 0; j < np; ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(p[j]));
        const double saved = p[j];
        p[j] = saved + h;
        residual(p, r1);
        for (std::size_t i = 0; i < nr; ++i)
            jac[i * np + j] = (r1[i] - r0[i]) / h;
        p[j] = saved;
    }
}

double sum_sq(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r)
        s += v * v;
    return s;
}

} // namespace

FitResult levenberg_marquardt(const ResidualFn& residual, std::size_t n_residuals,
                              std::vector<double> initial, const JacobianFn& jacobian,
                              const FitOptions& options) {
    const std::size_t np = initial.size();
    if (np == 0)
        throw std::invalid_argument("levenberg_marquardt: no parameters");

    FitResult result;
    std::vector<double> p = std::move(initial);
    std::vector<double> r, r_try, jac;
    residual(p, r);
    if (r.size() != n_residuals)
        throw std::invalid_argument("levenberg_marquardt: residual count mismatch");
    double chi2 = sum_sq(r);
    double lambda = options.lambda_init;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter + 1;
        if (jacobian)
            jacobian(p, jac);
        else
            numeric_jacobian(residual, p, r, jac);

        // normal equations JtJ, Jtr
        std::vector<double> jtj(np * np, 0.0), jtr(np, 0.0);
        for (std::size_t i = 0; i < n_residuals; ++i) {
            for (std::size_t a = 0; a < np; ++a) {
                jtr[a] += jac[i * np + a] * r[i];
                for (std::size_t b = 0; b <= a; ++b)
                    jtj[a * np + b] += jac[i * np + a] * jac[i * np + b];
            }
        }
        for (std::size_t a = 0; a < np; ++a)
            for (std::size_t b = a + 1; b < np; ++b)
                jtj[a * np + b] = jtj[b * np + a];

        bool stepped = false;
        for (int damp = 0; damp < 40; ++damp) {
            std::vector<double> a = jtj;
            for (std::size_t d = 0; d < np; ++d)
                a[d * np + d] += lambda * std::max(jtj[d * np + d], 1e-30);
            std::vector<double> step(jtr);
            if (cholesky_solve(a, step, np)) {
                std::vector<double> p_try(np);
                for (std::size_t d = 0; d < np; ++d)
                    p_try[d] = p[d] - step[d];
                residual(p_try, r_try);
                const double chi2_try = sum_sq(r_try);
                if (chi2_try <= chi2) {
                    double rel_change = 0.0;
                    for (std::size_t d = 0; d < np; ++d)
                        rel_change = std::max(rel_change, std::abs(step[d]) /
                                                              std::max(1e-300, std::abs(p[d]) + 1e-30));
                    p = std::move(p_try);
                    r = r_try;
                    chi2 = chi2_try;
                    lambda = std::max(lambda * 0.3, 1e-14);
                    stepped = true;
                    if (rel_change < options.param_tol) {
                        result.converged = true;
                    }
                    break;
                }
            }
            lambda *= 10.0;
            if (lambda > 1e14)
                break;
        }
        if (result.converged)
            break;
        if (!stepped) {
            // no downhill step found; accept as converged only if the
            // gradient is already negligible
            double gnorm = 0.0;
            for (double g : jtr)
                gnorm += g * g;
            if (std::sqrt(gnorm) < 1e-12 * (1.0 + chi2)) {
                result.converged = true;
                break;
            }
            char msg[160];
            std::snprintf(msg, sizeof msg,
                          "levenberg_marquardt: stalled at residual norm %.6e after %d iterations",
                          std::sqrt(chi2), iter + 1);
            throw FitError(msg);
        }
    }

    result.params = p;
    result.residual_norm = std::sqrt(chi2);

    // covariance = (JtJ)^-1 * chi2 / (n - p)
    if (jacobian)
        jacobian(p, jac);
    else
        numeric_jacobian(residual, p, r, jac);
    std::vector<double> jtj(np * np, 0.0);
    for (std::size_t i = 0; i < n_residuals; ++i)
        for (std::size_t a = 0; a < np; ++a)
            for (std::size_t b = 0; b < np; ++b)
                jtj[a * np + b] += jac[i * np + a] * jac[i * np + b];
    auto inv = spd_inverse(jtj, np);
    if (!inv.empty()) {
        const double dof = static_cast<double>(n_residuals > np ? n_residuals - np : 1);
        for (auto& v : inv)
            v *= chi2 / dof;
        result.covariance = std::move(inv);
    }
    return result;
}

std::vector<double> linear_least_squares(std::span<const double> design,
                                         std::span<const double> y, std::size_t n_params) {
    const std::size_t n = y.size();
    if (design.size() != n * n_params)
        throw std::invalid_argument("linear_least_squares: design size mismatch");
    std::vector<double> ata(n_params * n_params, 0.0), aty(n_params, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < n_params; ++a) {
            aty[a] += design[i * n_params + a] * y[i];
            for (std::size_t b = 0; b <= a; ++b)
                ata[a * n_params + b] += design[i * n_params + a] * design[i * n_params + b];
        }
    }
    for (std::size_t a = 0; a < n_params; ++a)
        for (std::size_t b = a + 1; b < n_params; ++b)
            ata[a * n_params + b] = ata[b * n_params + a];
    if (!cholesky_solve(ata, aty, n_params))
        throw FitError("linear_least_squares: singular normal equations");
    return aty;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two points");
    const std::size_t n = x.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit out;
    if (sxx == 0.0)
        throw std::invalid_argument("fit_line: degenerate abscissa");
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return out;
}

} // namespace srsim::fit
