// dynamics.hpp — semi-classical Maxwell-Bloch dynamics
//
// Equations of motion in the rotating frame of the drive carrier w_p:
//
//   da/dt      = -(i Dc + kappa) a - i g0 sum_j n_j s-_j + eta(t)
//   ds-_j/dt   = -(i Ds_j + gamma) s-_j + i g0 a sz_j
//   dsz_j/dt   = -4 g0 Im(conj(a) s-_j)
//
// with Ds_j = (w_j + delta(t)) - w_p and Dc = w_c - w_p. The cavity sum
// runs over frequency bins, each aggregating n_j spins with identical
// initial conditions. T1 processes are excluded; hold-time inversion loss
// enters through the initial condition instead.
//
// integrate() is a pure function of its inputs; trajectories may be
// computed concurrently without shared mutable state.

#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "srsim/ensemble.hpp"
#include "srsim/ode.hpp"
#include "srsim/pulses.hpp"

namespace srsim::dynamics {

// Per-bin expectation values. The Bloch-sphere bound for the stored pair
// is 4|s-|^2 + sz^2 <= 1 (s- carries the 1/2 of the lowering operator);
// the equations conserve that quadratic form per bin when gamma = 0.
struct SpinEnsembleState {
    std::vector<std::complex<double>> coherences;  // s-_j
    std::vector<double> inversions;                // sz_j in [-1, 1]

    std::size_t size() const { return coherences.size(); }
    void validate(const ensemble::BinnedEnsemble& bins) const;

    // ground state: all sz = -1, s- = 0
    static SpinEnsembleState ground(std::size_t n_bins);
    // uniform collective state: sz = p cos(theta), s- = (p/2) theta e^{i phi}
    static SpinEnsembleState tipped(std::size_t n_bins, double p, double theta, double phi);

    double bloch_norm_sq(std::size_t j) const;  // 4|s-_j|^2 + sz_j^2
};

// Piecewise-linear detuning delta(t); segments are contiguous and cover
// the simulation window. Switching edges are linear ramps.
struct DetuningSchedule {
    struct Segment {
        double t_start = 0.0;
        double t_end = 0.0;
        double value_start = 0.0;  // rad/s
        double value_end = 0.0;
    };
    std::vector<Segment> segments;

    double at(double t) const;
    void validate() const;
    bool covers(double t0, double t1) const;

    static DetuningSchedule constant(double delta, double t0, double t1);
    // hold at `delta_hold` until t_switch, then linear ramp of `edge`
    // seconds down to resonance (delta = 0)
    static DetuningSchedule hold_then_resonance(double delta_hold, double t_switch,
                                                double edge, double t_end);
};

struct Trajectory {
    std::vector<double> times;                            // s, uniform grid
    std::vector<std::complex<double>> cavity_amplitude;   // a(t), sqrt(photon)
    std::vector<double> inversion;                        // p(t) = sum n_j sz_j / sum n_j
    std::vector<double> transverse_magnitude;             // |sum n_j s-_j| / sum n_j
    double frame_frequency = 0.0;                         // w_p of the rotating frame

    std::size_t size() const { return times.size(); }
};

struct BurstRecord {
    double t_d = 0.0;      // time of maximum |a|, s (parabolic refinement)
    double i_d = 0.0;      // Re a at the maximum sample
    double q_d = 0.0;      // Im a at the maximum sample
    double max_amp = 0.0;  // hypot(i_d, q_d)
    double phase = 0.0;    // atan2(q_d, i_d)
};

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 0.0;
    std::uint64_t max_steps = 50'000'000;
};

// Right-hand side of the Maxwell-Bloch system at a single state point;
// exposed for direct testing of the equations. State layout (flat):
// [Re a, Im a, Re s-_0, Im s-_0, ..., sz_0, sz_1, ...].
void derivatives(const ensemble::SystemParams& params, const ensemble::BinnedEnsemble& bins,
                 std::span<const double> state, std::complex<double> eta, double delta,
                 double frame_frequency, std::span<double> dstate);

std::vector<double> pack_state(std::complex<double> cavity, const SpinEnsembleState& spins);
void unpack_state(std::span<const double> state, std::complex<double>& cavity,
                  SpinEnsembleState& spins);

// Integrate from t_start to t_end, sampling every output_dt. The rotating
// frame is the drive carrier when a drive is present, otherwise the cavity
// frequency. Throws StiffnessError naming the time when the step size
// underflows.
Trajectory integrate(const ensemble::SystemParams& params,
                     const ensemble::BinnedEnsemble& bins, const SpinEnsembleState& initial,
                     std::complex<double> initial_cavity, const pulses::DriveWaveform& drive,
                     const DetuningSchedule& schedule, double t_start, double t_end,
                     double output_dt, const IntegratorOptions& options = {});

// Steady-state cavity amplitude with the inversion frozen at p
// (Holstein-Primakoff-style linearization):
//   a_ss = eta / (kappa + i Dc + sum_j g0^2 n_j (-p) / (gamma + i Ds_j))
std::complex<double> steady_state_transmission(const ensemble::SystemParams& params,
                                               const ensemble::BinnedEnsemble& bins,
                                               double omega_p, double p, double drive_amp,
                                               double delta = 0.0);

// true iff p*C > 1 (strict)
bool threshold_check(double p, double cooperativity);

// Global maximum of |a| for t >= t_min with parabolic sub-sample
// refinement of t_d; ties resolve to the earlier sample. Returns nullopt
// for an all-zero trajectory (no burst, distinct from an error).
std::optional<BurstRecord> extract_burst(const Trajectory& traj, double t_min);

} // namespace srsim::dynamics
