// stochastic.hpp — statistics of the superradiant onset
//
// The inverted collective spin starts near the north pole with in-plane
// Gaussian fluctuations of width theta_bar; a trigger displaces the
// distribution by eta (in units of theta_bar) along a fixed direction.
// The tipping angle then follows a Rician density, the in-plane angle a
// projected-normal density, and the change of variables through
// t_d = -2 T_R log(theta/2) yields the delay-time density.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "srsim/dynamics.hpp"
#include "srsim/rng.hpp"

namespace srsim::stochastic {

struct TippingDistribution {
    double width_theta = 5.85e-4;        // theta_bar, rad (fitted experimental default)
    double displacement_eta = 0.0;       // in units of theta_bar
    double displacement_direction = 0.0; // rad, fixed 0 by convention

    void validate() const;
};

struct ShotSet {
    std::vector<dynamics::BurstRecord> records;
    double trigger_photons = 0.0;     // n_trig
    double displacement_eta = 0.0;    // eta used
    // sampled initial angles, kept for analysis (e.g. fitting T_R)
    std::vector<double> thetas;
    std::vector<double> phis;
};

// f_Theta(theta) = theta/tb^2 exp(-(theta^2/tb^2 + eta^2)/2) I0(theta eta / tb),
// evaluated through the exponentially scaled Bessel so large eta stays finite.
double rician_pdf(double theta, const TippingDistribution& dist);

// Rician CDF by adaptive quadrature of the density (used by KS tests).
double rician_cdf(double theta, const TippingDistribution& dist);

// Projected-normal angular density of an isotropic 2D Gaussian displaced
// by eta along phi = 0:
//   f_Phi(phi) = e^{-eta^2/2}/(2 pi)
//              + eta cos(phi) Phi(eta cos phi) phi_pdf(eta sin phi),
// normalized over (-pi, pi] and reducing to 1/(2 pi) at eta = 0.
double angular_pdf(double phi, double eta);

// t_d = -2 T_R log(theta/2) and its inverse theta = 2 exp(-t_d / (2 T_R))
double delay_from_theta(double theta, double t_r);
double theta_from_delay(double t_d, double t_r);

// f_td(t_d) = f_Theta(theta(t_d)) * theta(t_d) / (2 T_R)
double delay_pdf(double t_d, const TippingDistribution& dist, double t_r);
double delay_cdf(double t_d, const TippingDistribution& dist, double t_r);

// One draw of (theta, phi): (x, y) ~ N((eta tb, 0), tb^2 I) rotated by the
// displacement direction; theta = hypot(x, y), phi = atan2.
std::pair<double, double> sample_tipping(const TippingDistribution& dist, Rng& rng);

// Collective tipped ensemble state for a (theta, phi) draw at inversion p:
// sz_j = p cos(theta), s-_j = (p/2) theta e^{i phi}, identical across bins.
dynamics::SpinEnsembleState tipped_state(std::size_t n_bins, double p, double theta,
                                         double phi);

// eta = kappa_cal * sqrt(n_trig)
double displacement_from_photons(double n_trig, double kappa_cal);

// Mean of cos(phi_i - phi_j) over unordered pairs, in [-1, 1].
double phase_coherence(const ShotSet& set);
double phase_coherence(const std::vector<double>& phases);

struct MonteCarloConfig {
    int n_shots = 1;
    std::uint64_t seed = 0;
    double inversion = 0.34;        // stored p when resonance is restored
    double p_jitter = 0.0;          // relative per-shot spread of p (switch latching), off by default
    double t_end = 3e-6;            // s
    double output_dt = 1e-9;        // s
    double t_min = 0.0;             // burst search start
    double trigger_delay = 150e-9;  // physical trigger start after switch-back
    int jobs = 1;                   // shot-level parallelism cap
    dynamics::IntegratorOptions integrator;
};

// Monte Carlo burst generation. Two trigger paths are supported:
//  - analytic (fast): dist.displacement_eta displaces the sampled tipping
//    state directly; no drive is applied. The displacement direction that
//    corresponds to a physical trigger of carrier phase alpha is
//    alpha + pi/2 (one factor i from the spin drive term, compensated at
//    emission by the -i in the cavity equation).
//  - physical: pass a trigger waveform; it is applied starting at
//    trigger_delay, and the tipping state is sampled with eta = 0.
// Deterministic for a fixed seed; shots may run in parallel (jobs > 1)
// with per-shot derived seeds, results ordered by shot index.
ShotSet monte_carlo_bursts(const ensemble::SystemParams& params,
                           const ensemble::BinnedEnsemble& bins,
                           const TippingDistribution& dist, const MonteCarloConfig& config,
                           const std::optional<pulses::DriveWaveform>& trigger = std::nullopt);

} // namespace srsim::stochastic
