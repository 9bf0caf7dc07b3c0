// pulses.hpp — drive waveform synthesis
//
// Baseband complex drives eta(t) in the rotating frame of the carrier,
// in the amplitude units of the cavity equation (rad/s * sqrt(photon)).
// Sign convention: eta = I - iQ, with a real (positive) eta defining the
// I axis. Waveform constructors are pure; outputs are immutable.

#pragma once

#include <complex>
#include <vector>

#include "srsim/ensemble.hpp"

namespace srsim::pulses {

struct DriveWaveform {
    double sample_period = 0.0;                  // s
    std::vector<std::complex<double>> samples;   // eta(k * sample_period)
    double carrier_frequency = 0.0;              // omega_p, rad/s

    bool empty() const { return samples.empty(); }
    double duration() const {
        return samples.empty() ? 0.0 : sample_period * static_cast<double>(samples.size());
    }
    // linear interpolation between samples, zero outside [0, duration)
    std::complex<double> at(double t) const;
    // sum |eta|^2 dt over the samples
    double energy() const;

    void validate() const;
};

// Gaussian-envelope chirp target for the intracavity amplitude: the
// envelope peaks at peak_target_amplitude and the instantaneous frequency
// sweeps linearly across sweep_span centered on `center` (rad/s, relative
// to the carrier).
struct ChirpSpec {
    double duration = 400e-9;            // s
    double envelope_fwhm = 200e-9;       // s, Gaussian envelope FWHM
    double sweep_span = 0.0;             // rad/s covered end to end
    double center = 0.0;                 // rad/s offset of the sweep midpoint
    double peak_target_amplitude = 1.0;  // sqrt(photon)

    void validate() const;
};

// Sampled target a(t) on a uniform grid of step dt (dt <= duration/1000,
// so the sweep is resolved).
std::vector<std::complex<double>> chirp_target(const ChirpSpec& spec, double dt);

// Drive that realizes a_target in the cavity:
//   eta(t) = da/dt + (i delta_c + kappa) a(t),
// with the derivative from centered differences (one-sided at the ends).
// The spin back-action is deliberately not compensated.
pulses::DriveWaveform compensate_drive(const std::vector<std::complex<double>>& a_target,
                                       const ensemble::SystemParams& params, double delta_c,
                                       double dt, double carrier_frequency);

DriveWaveform rectangular_pulse(double duration, double amplitude, double phase, double dt,
                                double carrier_frequency);

// Concatenation with silent gaps; total duration = count * period.
DriveWaveform pulse_train(const DriveWaveform& pulse, double period, int count);

// Same waveform preceded by `delay` seconds of silence (rounded to the
// sample grid); used to place trigger pulses inside a simulation window.
DriveWaveform delayed(const DriveWaveform& pulse, double delay);

} // namespace srsim::pulses
