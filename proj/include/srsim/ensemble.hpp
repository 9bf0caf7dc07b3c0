// ensemble.hpp — inhomogeneously broadened spin ensemble
//
// q-Gaussian frequency distribution, discretization into weighted bins,
// effective linewidth, cooperativity and spin-count conversions. All
// objects are immutable after construction and safe for shared reads.

#pragma once

#include <cstddef>
#include <vector>

namespace srsim::ensemble {

// q-Gaussian density rho(w), parametrized by center, FWHM and shape q.
// q -> 1 recovers a Gaussian, q = 2 is a Lorentzian; normalizable for
// 1 < q < 3. The normalization constant of the family is analytic and
// cached on first use.
struct QGaussianSpec {
    double center_frequency = 0.0;  // rad/s
    double fwhm_gamma_q = 0.0;      // rad/s, full width at half maximum
    double shape_q = 1.39;

    void validate() const;  // throws std::invalid_argument
};

// Frequency-binned ensemble: equidistant bin centers, weights
// rho_j = rho(w_j) dw and per-bin spin counts n_j = rho_j N. Weights are
// not renormalized after tail truncation: spins outside the span simply
// do not participate.
struct BinnedEnsemble {
    std::vector<double> bin_frequencies;  // rad/s, strictly increasing, constant spacing
    std::vector<double> bin_weights;      // dimensionless, sum <= 1
    std::vector<double> bin_counts;       // n_j = rho_j N
    double total_spins = 0.0;             // N
    double single_spin_coupling = 0.0;    // g0 = g_coll / sqrt(N), rad/s

    std::size_t size() const { return bin_frequencies.size(); }
    double weight_sum() const;
    double count_sum() const;
    double spacing() const;  // dw

    void validate() const;
};

struct SystemParams {
    double cavity_frequency = 0.0;     // omega_c, rad/s
    double cavity_halfwidth = 0.0;     // kappa, rad/s (HWHM)
    double collective_coupling = 0.0;  // g_coll, rad/s
    double spin_halfwidth = 0.0;       // gamma_perp, rad/s
    QGaussianSpec distribution;
    double total_spins = 1.0;          // N

    double single_spin_coupling() const;  // g_coll / sqrt(N)
    void validate() const;
};

// Normalized density value rho(w) in s/rad; integrates to 1 over the line.
double q_gaussian_density(const QGaussianSpec& spec, double omega);

// Equidistant sampling of rho over center +- span*gamma_q (span in FWHM
// multiples). n_bins >= 3.
BinnedEnsemble discretize(const QGaussianSpec& spec, const SystemParams& params,
                          int n_bins, double span);

// Effective ensemble linewidth: reciprocal of the complex-weighted average
// of single-spin responses evaluated at the spin center frequency,
//   Gamma_perp = [ int rho(w) dw / (gamma_perp + i (w - w0)) ]^-1 .
// The real part of the reciprocal is returned; for a symmetric density the
// integral is purely real. Integration substitutes w - w0 = gamma*tan(u) to
// resolve the narrow Lorentzian kernel, then refines adaptively.
double effective_linewidth(const QGaussianSpec& spec, double gamma_perp, double omega0);

// Same quantity from a discretized ensemble (used for convergence checks).
double effective_linewidth(const BinnedEnsemble& bins, double gamma_perp, double omega0);

// C = g_coll^2 / (kappa * Gamma_perp)
double cooperativity(const SystemParams& params, double gamma_eff);

// Single-spin coupling from the simulated zero-point field:
// g0 = gamma_nv * b0 * sqrt(2/3); gamma_nv in rad/s per tesla, result rad/s.
// The geometric factor accounts for the four NV orientations relative to
// the mode field.
double coupling_from_field(double b0_tesla, double gamma_nv);

// N = (g_coll / g0)^2
double spin_count_estimate(double g_coll, double g0);

} // namespace srsim::ensemble
