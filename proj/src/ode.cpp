#include "srsim/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "srsim/errors.hpp"

namespace srsim::ode {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;

// b - b* (embedded 4th order error weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// dense output weights (Hairer, Norsett, Wanner)
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

} // namespace

void integrate_adaptive(const Rhs& rhs, std::vector<double>& y, double t0, double t1,
                        const Options& options, const DenseCallback& on_step) {
    const std::size_t n = y.size();
    if (t1 < t0)
        throw std::invalid_argument("integrate_adaptive: t1 < t0");
    if (t1 == t0)
        return;

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    std::vector<double> ytmp(n), ynew(n);
    std::vector<double> rc1(n), rc2(n), rc3(n), rc4(n), rc5(n);

    double t = t0;
    rhs(t, y, k1);

    // initial step: conservative scale from the first derivative, floored
    // well above the underflow threshold (a zero initial state under a
    // strong drive would otherwise suggest an absurdly small step; the
    // rejection loop shrinks an overestimate within a few trials)
    double h = options.initial_step;
    if (h <= 0.0) {
        double ynorm = 0.0, fnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ynorm = std::max(ynorm, std::abs(y[i]));
            fnorm = std::max(fnorm, std::abs(k1[i]));
        }
        h = (fnorm > 0.0) ? 0.01 * std::max(ynorm, options.abs_tol) / fnorm
                          : 1e-6 * (t1 - t0);
        h = std::clamp(h, 1e-9 * (t1 - t0), 1e-2 * (t1 - t0));
    }
    if (options.max_step > 0.0)
        h = std::min(h, options.max_step);

    double err_prev = 1.0;
    bool rejected = false;
    std::uint64_t steps = 0;

    while (t < t1) {
        if (++steps > options.max_steps) {
            char msg[128];
            std::snprintf(msg, sizeof msg,
                          "integrator: step budget exhausted at t = %.9e s", t);
            throw StiffnessError(msg, t);
        }
        const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                               std::max(std::abs(t), std::abs(t1 - t0));
        if (h < h_floor) {
            char msg[128];
            std::snprintf(msg, sizeof msg,
                          "integrator: step size underflow (stiffness) at t = %.9e s", t);
            throw StiffnessError(msg, t);
        }
        bool last = false;
        if (t + h >= t1) {
            h = t1 - t;
            last = true;
        }

        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                  b6 * k6[i]);
        rhs(t + h, ynew, k7);  // FSAL

        // scaled RMS error norm
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            const double scale = options.abs_tol +
                                 options.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double q = e / scale;
            err += q * q;
        }
        err = std::sqrt(err / n);

        if (err <= 1.0) {
            if (on_step) {
                // rcont coefficients for 4th-order interpolation on [t, t+h]
                for (std::size_t i = 0; i < n; ++i) {
                    const double dy = ynew[i] - y[i];
                    const double bspl = h * k1[i] - dy;
                    rc1[i] = y[i];
                    rc2[i] = dy;
                    rc3[i] = bspl;
                    rc4[i] = dy - h * k7[i] - bspl;
                    rc5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                  d6 * k6[i] + d7 * k7[i]);
                }
                const double tL = t, hL = h;
                auto eval = [&](double s, std::span<double> out) {
                    const double th = (s - tL) / hL;
                    const double th1 = 1.0 - th;
                    for (std::size_t i = 0; i < n; ++i)
                        out[i] = rc1[i] +
                                 th * (rc2[i] + th1 * (rc3[i] + th * (rc4[i] + th1 * rc5[i])));
                };
                on_step(t, t + h, eval);
            }
            t += h;
            std::swap(y, ynew);
            std::swap(k1, k7);

            // PI controller
            const double safe = 0.9;
            double fac = safe * std::pow(err > 0.0 ? err : 1e-10, -0.7 / 5.0) *
                         std::pow(err_prev, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, rejected ? 1.0 : 10.0);
            h *= fac;
            if (options.max_step > 0.0)
                h = std::min(h, options.max_step);
            err_prev = std::max(err, 1e-10);
            rejected = false;
            if (last && t >= t1)
                break;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            rejected = true;
        }
    }
}

void integrate_sampled(const Rhs& rhs, std::vector<double>& y, double t0, double t1,
                       double output_dt, const Options& options,
                       const std::function<void(double, std::span<const double>)>& emit) {
    if (!(output_dt > 0.0))
        throw std::invalid_argument("integrate_sampled: output_dt must be positive");
    std::vector<double> row(y.size());
    emit(t0, y);
    double next = t0 + output_dt;
    std::size_t index = 1;
    integrate_adaptive(
        rhs, y, t0, t1, options,
        [&](double, double tb, const std::function<void(double, std::span<double>)>& eval) {
            while (next <= tb + 1e-12 * std::max(std::abs(tb), 1.0) && next <= t1) {
                eval(std::min(next, tb), row);
                emit(next, row);
                ++index;
                next = t0 + static_cast<double>(index) * output_dt;
            }
        });
}

} // namespace srsim::ode
