// math.hpp — quadrature and special functions used across modules

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>

#include "srsim/errors.hpp"
#include "srsim/units.hpp"

namespace srsim::math {

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1] (symmetric half listed)
inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double gk_weights_kronrod[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double gk_weights_gauss[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename T, typename F>
void gk15(const F& f, double a, double b, T& kronrod, double& err_abs) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    T result_gauss{};
    T result_kronrod{};
    for (int i = 0; i < 8; ++i) {
        const double x = h * gk_nodes[i];
        const T fv = (i == 7) ? f(c) : T(f(c - x)) + T(f(c + x));
        result_kronrod += gk_weights_kronrod[i] * fv;
        if (i % 2 == 1)
            result_gauss += gk_weights_gauss[i / 2] * fv;
    }
    kronrod = result_kronrod * h;
    err_abs = std::abs((result_kronrod - result_gauss) * h);
}

template <typename T, typename F>
T adaptive_gk(const F& f, double a, double b, double rel_tol, double abs_tol,
              int depth, double global_scale) {
    T whole;
    double err;
    gk15<T>(f, a, b, whole, err);
    const double tol = std::max(abs_tol, rel_tol * std::max(global_scale, std::abs(whole)));
    if (err <= tol)
        return whole;
    if (depth <= 0)
        throw NumericalToleranceError("adaptive quadrature: tolerance not reached (max depth)");
    const double mid = 0.5 * (a + b);
    return adaptive_gk<T>(f, a, mid, rel_tol, abs_tol * 0.5, depth - 1, global_scale) +
           adaptive_gk<T>(f, mid, b, rel_tol, abs_tol * 0.5, depth - 1, global_scale);
}

} // namespace detail

// Adaptive Gauss-Kronrod 7-15 on a finite interval. T is double or
// std::complex<double>. Throws NumericalToleranceError when the local
// error cannot be pushed below tolerance within the recursion budget.
template <typename T = double, typename F>
T integrate(const F& f, double a, double b, double rel_tol = 1e-10,
            double abs_tol = 0.0, int max_depth = 60) {
    T probe;
    double err;
    detail::gk15<T>(f, a, b, probe, err);
    return detail::adaptive_gk<T>(f, a, b, rel_tol, abs_tol, max_depth, std::abs(probe));
}

// Single non-adaptive Gauss-Kronrod panel; used for rough scale probes.
template <typename T = double, typename F>
T gauss_kronrod_15(const F& f, double a, double b) {
    T value;
    double err;
    detail::gk15<T>(f, a, b, value, err);
    return value;
}

// Exponentially scaled modified Bessel function I0(x)*exp(-|x|).
// Power series below the crossover, asymptotic expansion above; the
// scaled form never overflows, which matters for Rician densities at
// large displacement.
inline double bessel_i0e(double x) {
    x = std::abs(x);
    if (x < 20.0) {
        // sum (x^2/4)^k / (k!)^2
        const double q = 0.25 * x * x;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < sum * 1e-17)
                break;
        }
        return sum * std::exp(-x);
    }
    // I0(x) ~ e^x/sqrt(2 pi x) * sum a_k / x^k,  a_k = prod (2j-1)^2 / (8 k!)
    double sum = 1.0, term = 1.0;
    for (int k = 1; k <= 12; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= odd * odd / (8.0 * k);
        sum += term / std::pow(x, k);
    }
    return sum / std::sqrt(two_pi * x);
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(two_pi);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Bisection root finder for monotone brackets; used by peak/half-maximum
// searches in tests and the transmission sweep analysis.
template <typename F>
double bisect(const F& f, double lo, double hi, double x_tol = 1e-14, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("bisect: endpoints do not bracket a root");
    for (int i = 0; i < max_iter; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0 || 0.5 * (hi - lo) < x_tol * std::max(1.0, std::abs(mid)))
            return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double phi) {
    phi = std::fmod(phi, two_pi);
    if (phi <= -pi) phi += two_pi;
    if (phi > pi) phi -= two_pi;
    return phi;
}

} // namespace srsim::math
