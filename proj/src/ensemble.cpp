#include "srsim/ensemble.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "srsim/math.hpp"
#include "srsim/units.hpp"

namespace srsim::ensemble {

namespace {

// rho(x) = Cq [1 + (q-1) beta x^2]^(-1/(q-1)),  x = w - w0.
// beta fixes the FWHM; Cq is the analytic normalization of the family
// (a Student-t in disguise). Evaluated through log1p so the q -> 1
// Gaussian limit stays numerically clean.
struct QGaussianKernel {
    double beta;
    double cq;
    double qm1;

    explicit QGaussianKernel(const QGaussianSpec& spec) {
        spec.validate();
        qm1 = spec.shape_q - 1.0;
        const double g = spec.fwhm_gamma_q;
        beta = 4.0 * (std::pow(2.0, qm1) - 1.0) / (qm1 * g * g);
        const double inv = 1.0 / qm1;
        cq = std::sqrt(qm1 * beta / pi) *
             std::exp(std::lgamma(inv) - std::lgamma(inv - 0.5));
    }

    double operator()(double x) const {
        return cq * std::exp(-std::log1p(qm1 * beta * x * x) / qm1);
    }
};

} // namespace

void QGaussianSpec::validate() const {
    if (!(shape_q > 1.0) || !(shape_q < 3.0))
        throw std::invalid_argument("QGaussianSpec: shape_q must satisfy 1 < q < 3");
    if (!(fwhm_gamma_q > 0.0) || !std::isfinite(fwhm_gamma_q))
        throw std::invalid_argument("QGaussianSpec: fwhm_gamma_q must be positive");
    if (!std::isfinite(center_frequency))
        throw std::invalid_argument("QGaussianSpec: center_frequency must be finite");
}

double BinnedEnsemble::weight_sum() const {
    double s = 0.0;
    for (double w : bin_weights)
        s += w;
    return s;
}

double BinnedEnsemble::count_sum() const {
    double s = 0.0;
    for (double n : bin_counts)
        s += n;
    return s;
}

double BinnedEnsemble::spacing() const {
    if (bin_frequencies.size() < 2)
        return 0.0;
    return bin_frequencies[1] - bin_frequencies[0];
}

void BinnedEnsemble::validate() const {
    const std::size_t n = bin_frequencies.size();
    if (n < 3)
        throw std::invalid_argument("BinnedEnsemble: need at least 3 bins");
    if (bin_weights.size() != n || bin_counts.size() != n)
        throw std::invalid_argument("BinnedEnsemble: array length mismatch");
    const double dw = spacing();
    if (!(dw > 0.0))
        throw std::invalid_argument("BinnedEnsemble: bins must be strictly increasing");
    // equidistant up to representation noise of the absolute frequencies
    const double tol = 1e-12 * dw +
                       8.0 * std::numeric_limits<double>::epsilon() *
                           std::abs(bin_frequencies.back());
    for (std::size_t i = 1; i < n; ++i) {
        const double d = bin_frequencies[i] - bin_frequencies[i - 1];
        if (!(d > 0.0) || std::abs(d - dw) > tol)
            throw std::invalid_argument("BinnedEnsemble: spacing not equidistant");
    }
    const double ws = weight_sum();
    if (!(ws >= 0.99 && ws <= 1.0 + 1e-12))
        throw std::invalid_argument("BinnedEnsemble: weight sum outside [0.99, 1]; widen span");
    for (double c : bin_counts)
        if (c < 0.0)
            throw std::invalid_argument("BinnedEnsemble: negative bin count");
}

double SystemParams::single_spin_coupling() const {
    return collective_coupling / std::sqrt(total_spins);
}

void SystemParams::validate() const {
    if (!(cavity_frequency > 0.0) || !(cavity_halfwidth > 0.0) ||
        !(collective_coupling > 0.0) || !(spin_halfwidth > 0.0))
        throw std::invalid_argument("SystemParams: all rates must be strictly positive");
    if (!(total_spins >= 1.0))
        throw std::invalid_argument("SystemParams: total_spins must be >= 1");
    distribution.validate();
}

double q_gaussian_density(const QGaussianSpec& spec, double omega) {
    if (!std::isfinite(omega))
        throw std::invalid_argument("q_gaussian_density: omega must be finite");
    const QGaussianKernel k(spec);
    return k(omega - spec.center_frequency);
}

BinnedEnsemble discretize(const QGaussianSpec& spec, const SystemParams& params,
                          int n_bins, double span) {
    if (n_bins < 3)
        throw std::invalid_argument("discretize: n_bins must be >= 3");
    if (!(span > 0.0))
        throw std::invalid_argument("discretize: span must be positive");
    const QGaussianKernel k(spec);

    BinnedEnsemble out;
    out.bin_frequencies.resize(n_bins);
    out.bin_weights.resize(n_bins);
    out.bin_counts.resize(n_bins);
    out.total_spins = params.total_spins;
    out.single_spin_coupling = params.single_spin_coupling();

    const double half = span * spec.fwhm_gamma_q;
    const double dw = 2.0 * half / (n_bins - 1);
    for (int j = 0; j < n_bins; ++j) {
        const double x = -half + j * dw;
        out.bin_frequencies[j] = spec.center_frequency + x;
        out.bin_weights[j] = k(x) * dw;
        out.bin_counts[j] = out.bin_weights[j] * params.total_spins;
    }
    return out;
}

double effective_linewidth(const QGaussianSpec& spec, double gamma_perp, double omega0) {
    if (!(gamma_perp > 0.0))
        throw std::invalid_argument("effective_linewidth: gamma_perp must be positive");
    const QGaussianKernel k(spec);
    const double shift = omega0 - spec.center_frequency;

    // x = gamma_perp * tan(u) maps the line onto (-pi/2, pi/2): the real
    // part becomes int rho(w0 + x) du, the imaginary part gains a -tan(u)
    // factor (odd, vanishing for a symmetric density on center). Explicit
    // breakpoints at both the kernel and density scales keep the adaptive
    // refinement honest when gamma_q and gamma_perp are far apart.
    const double lim = pi / 2 - 1e-12;
    std::vector<double> cuts{-lim};
    for (double scale : {0.01 * spec.fwhm_gamma_q, 0.3 * spec.fwhm_gamma_q,
                         3.0 * spec.fwhm_gamma_q, 50.0 * spec.fwhm_gamma_q, gamma_perp,
                         10.0 * gamma_perp}) {
        const double u = std::atan((std::abs(shift) + scale) / gamma_perp);
        if (u > 1e-9 && u < lim) {
            cuts.push_back(-u);
            cuts.push_back(u);
        }
    }
    cuts.push_back(0.0);
    cuts.push_back(lim);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto re_f = [&](double u) { return k(shift + gamma_perp * std::tan(u)); };
    const auto im_f = [&](double u) {
        return -k(shift + gamma_perp * std::tan(u)) * std::tan(u);
    };

    // scale from a coarse pass over the (positive) real part; both parts
    // only need accuracy relative to it, since they enter one reciprocal
    double scale = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i)
        scale += std::abs(math::gauss_kronrod_15<double>(re_f, cuts[i - 1], cuts[i]));

    const auto piecewise = [&](const auto& f) {
        const double abs_tol = 1e-10 * scale / static_cast<double>(cuts.size());
        double total = 0.0;
        for (std::size_t i = 1; i < cuts.size(); ++i)
            total += math::integrate<double>(f, cuts[i - 1], cuts[i], 1e-9, abs_tol);
        return total;
    };
    const double re = piecewise(re_f);
    const double im = piecewise(im_f);
    return (1.0 / std::complex<double>(re, im)).real();
}

double effective_linewidth(const BinnedEnsemble& bins, double gamma_perp, double omega0) {
    if (!(gamma_perp > 0.0))
        throw std::invalid_argument("effective_linewidth: gamma_perp must be positive");
    std::complex<double> integral = 0.0;
    for (std::size_t j = 0; j < bins.size(); ++j) {
        const double detuning = bins.bin_frequencies[j] - omega0;
        integral += bins.bin_weights[j] / std::complex<double>(gamma_perp, detuning);
    }
    return (1.0 / integral).real();
}

double cooperativity(const SystemParams& params, double gamma_eff) {
    if (!(gamma_eff > 0.0))
        throw std::invalid_argument("cooperativity: gamma_eff must be positive");
    params.validate();
    return params.collective_coupling * params.collective_coupling /
           (params.cavity_halfwidth * gamma_eff);
}

double coupling_from_field(double b0_tesla, double gamma_nv) {
    if (b0_tesla < 0.0)
        throw std::invalid_argument("coupling_from_field: field must be non-negative");
    return gamma_nv * b0_tesla * std::sqrt(2.0 / 3.0);
}

double spin_count_estimate(double g_coll, double g0) {
    if (!(g0 > 0.0))
        throw std::invalid_argument("spin_count_estimate: g0 must be positive");
    const double r = g_coll / g0;
    return r * r;
}

} // namespace srsim::ensemble
