// calibration.hpp — measurement-chain math
//
// Input-output S-parameter fits, pulse photon-number estimation, the
// thermal-photon ladder down the cryostat stages, the dispersive shift
// used for T1 readout, decay-curve fits, and the delay-time/phase
// post-processing applied to shot sets. All operations are pure; fits are
// deterministic given identical inputs and initial guesses.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "srsim/fit.hpp"
#include "srsim/stochastic.hpp"

namespace srsim::calibration {

// External couplings and line attenuations. kappa values are rad/s,
// kappa_tot is the total HWHM; attenuations are linear power factors.
struct PortCouplings {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double kappa_tot = 0.0;
    double a1 = 1.0;
    double a2 = 1.0;
    double a3 = 1.0;

    void validate() const;
};

struct SParamsOnResonance {
    double s11 = 0.0;  // |S11|^2 = A1^2 (2 k1/ktot - 1)^2
    double s31 = 0.0;  // |S31|^2 = A1 A3 (2 sqrt(k1 k2)/ktot)^2
    double s32 = 0.0;  // |S32|^2 = A2 A3 (2 k2/ktot - 1)^2
};

SParamsOnResonance s_parameters_on_resonance(const PortCouplings& c);

// Full input-output traces versus detuning (power ratios, not dB):
//   reflection  |S_ii|^2(d) = A^2 |2 k_i/(ktot + i d) - 1|^2
//   transmission|S_31|^2(d) = A1 A3 * 4 k1 k2 / (ktot^2 + d^2)
double s11_trace(const PortCouplings& c, double detuning);
double s31_trace(const PortCouplings& c, double detuning);
double s32_trace(const PortCouplings& c, double detuning);

struct Trace {
    std::vector<double> frequency;  // Hz (file convention)
    std::vector<double> value_db;   // 10 log10 of the power ratio
};

struct PortFitDiagnostics {
    double resonance_frequency = 0.0;  // Hz
    double residual_norm = 0.0;
    std::vector<double> covariance;    // from the kappa_tot Lorentzian stage
    bool converged = false;
};

// Least-squares recovery of the couplings: kappa_tot from the Lorentzian
// HWHM of |S31|^2, then kappa_1/kappa_2 from the dip depths relative to
// each trace's base level. The under-coupled branch (kappa_i < ktot/2) is
// selected unless the initial guess says otherwise. Throws FitError with
// a residual report when a stage does not converge.
PortCouplings fit_port_couplings(const Trace& s11, const Trace& s31, const Trace& s32,
                                 const PortCouplings& guess,
                                 PortFitDiagnostics* diagnostics = nullptr);

// Photons charged into the cavity by a rectangular pulse of duration dt:
//   n = P/(hbar w_c) * A * 2 kappa_in / kappa_tot^2 * (1 - e^{-dt ktot})^2
double pulse_photons(double power_in, double omega_c, double a_line, double kappa_in,
                     double kappa_tot, double dt);

// a(t) = eta_d/ktot (1 - e^{-t ktot}) for a constant drive from t = 0
double cavity_charging(double eta_d, double kappa_tot, double t);

// eta_d = sqrt(2 kappa_in P / (hbar w_c))
double drive_from_power(double power_in, double omega_c, double kappa_in);

// Cryostat stage ladder for one MW line, ordered warm to cold. The
// attenuation (dB, negative) applies between a stage and the next colder
// one; the last stage's value is unused.
struct Stage {
    double temperature = 0.0;          // K
    double attenuation_db_to_next = 0.0;
};

struct StageLadder {
    std::vector<Stage> stages;
    void validate() const;
};

struct LadderResult {
    std::vector<double> occupancy;  // n_i per stage, warm to cold
    double base = 0.0;              // occupancy reaching the cavity
};

// n_i = nbar(T_i) + A_{i-1,i} n_{i-1}, nbar the Bose-Einstein occupancy.
LadderResult thermal_ladder(const StageLadder& ladder, double omega_c);
double bose_occupancy(double temperature, double omega);

// Dispersive cavity pull by a far-detuned ensemble at inversion p:
//   chi = g_coll^2 * p / delta,
// which is exactly the dispersive limit of the steady-state transmission.
// dispersive_regime (if given) is set false when |delta| < 10 g_coll.
double dispersive_shift(double g_coll, double delta, double p,
                        bool* dispersive_regime = nullptr);

struct DecayFit {
    double amplitude = 0.0;
    double timescale = 0.0;       // tau (or tau0 for the stretched form)
    double residual_norm = 0.0;
    bool degenerate = false;      // constant series: tau -> infinity
};

// y = A exp(-x/tau), least squares in log space. Ordinates must be positive.
DecayFit fit_exponential(std::span<const double> x, std::span<const double> y);

// y = A exp(-(x/tau0)^exponent), direct nonlinear fit with the exponent held
// fixed (default 1/2, the three-dimensional spin-diffusion form).
DecayFit fit_stretched_exponential(std::span<const double> x, std::span<const double> y,
                                   double exponent = 0.5);

struct RescaleDiagnostics {
    double t0 = 0.0;              // fitted offset of t_d = t0 + C/max_amp
    double hyperbola_c = 0.0;     // fitted C
    std::vector<std::size_t> excluded;  // indices outside the amplitude band
};

// Aligns the fitted hyperbola t_d = t0 + C/max_amp onto the vertical line
// at reference_amp: every t_d becomes t_d - C/max_amp + C/reference_amp.
// Records outside `band_mads` median absolute deviations of max_amp are
// excluded from the fit and from the returned set (and reported).
stochastic::ShotSet rescale_delay_times(const stochastic::ShotSet& records,
                                        double reference_amp, double band_mads = 2.5,
                                        RescaleDiagnostics* diagnostics = nullptr);

struct PhaseDriftDiagnostics {
    double slope = 0.0;      // rad/s of t_d
    double intercept = 0.0;  // rad
};

// Fits phi = alpha t_d + beta (after unwrapping along t_d), subtracts the
// line from every phase and wraps the result back to (-pi, pi].
stochastic::ShotSet correct_phase_drift(const stochastic::ShotSet& records,
                                        PhaseDriftDiagnostics* diagnostics = nullptr);

} // namespace srsim::calibration
