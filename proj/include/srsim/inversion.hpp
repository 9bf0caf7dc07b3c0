// inversion.hpp — chirp-based ensemble inversion
//
// Couples the pulse synthesis to the dynamics: drive the ground-state
// ensemble with a cavity-compensated chirp and report the inversion
// efficiency. The optimal drive amplitude is found by scanning, mirroring
// how the experiment selects the pulse power.

#pragma once

#include <vector>

#include "srsim/dynamics.hpp"
#include "srsim/pulses.hpp"

namespace srsim::pulses {

// (p_final + 1)/2 with p_final read from the trajectory at (or just after)
// pulse_end; with pulse_end <= 0 the last sample is used. Inversion runs
// should therefore end at or shortly after the pulse.
double inversion_efficiency(const dynamics::Trajectory& traj, double pulse_end = 0.0);

struct InversionScanPoint {
    double amplitude = 0.0;   // peak target amplitude, sqrt(photon)
    double efficiency = 0.0;  // (p+1)/2
    double p_final = 0.0;
};

struct InversionScanResult {
    std::vector<InversionScanPoint> points;
    InversionScanPoint best;
};

// Runs the compensated chirp at each amplitude from a ground-state
// ensemble and records the efficiency just after pulse end.
InversionScanResult scan_inversion_amplitude(const ensemble::SystemParams& params,
                                             const ensemble::BinnedEnsemble& bins,
                                             ChirpSpec chirp,
                                             const std::vector<double>& amplitudes,
                                             double dt,
                                             const dynamics::IntegratorOptions& options = {});

} // namespace srsim::pulses
