#include "srsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srsim/units.hpp"

namespace srsim::dynamics {

void SpinEnsembleState::validate(const ensemble::BinnedEnsemble& bins) const {
    if (coherences.size() != bins.size() || inversions.size() != bins.size())
        throw std::invalid_argument("SpinEnsembleState: array lengths must equal bin count");
    for (std::size_t j = 0; j < coherences.size(); ++j) {
        if (std::norm(coherences[j]) + inversions[j] * inversions[j] > 1.0 + 1e-6)
            throw std::invalid_argument("SpinEnsembleState: Bloch-sphere bound violated");
    }
}

SpinEnsembleState SpinEnsembleState::ground(std::size_t n_bins) {
    SpinEnsembleState s;
    s.coherences.assign(n_bins, {});
    s.inversions.assign(n_bins, -1.0);
    return s;
}

SpinEnsembleState SpinEnsembleState::tipped(std::size_t n_bins, double p, double theta,
                                            double phi) {
    SpinEnsembleState s;
    s.coherences.assign(n_bins, std::polar(0.5 * p * theta, phi));
    s.inversions.assign(n_bins, p * std::cos(theta));
    return s;
}

double SpinEnsembleState::bloch_norm_sq(std::size_t j) const {
    return 4.0 * std::norm(coherences[j]) + inversions[j] * inversions[j];
}

double DetuningSchedule::at(double t) const {
    if (segments.empty())
        return 0.0;
    if (t <= segments.front().t_start) {
        return segments.front().value_start;
    }
    for (const auto& seg : segments) {
        if (t <= seg.t_end) {
            if (t < seg.t_start)
                break;  // gap; validate() rejects this
            const double span = seg.t_end - seg.t_start;
            if (span <= 0.0)
                return seg.value_end;
            const double f = (t - seg.t_start) / span;
            return seg.value_start + f * (seg.value_end - seg.value_start);
        }
    }
    return segments.back().value_end;
}

void DetuningSchedule::validate() const {
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].t_end < segments[i].t_start)
            throw std::invalid_argument("DetuningSchedule: segment ends before it starts");
        if (i > 0 && std::abs(segments[i].t_start - segments[i - 1].t_end) >
                         1e-12 * std::max(1.0, std::abs(segments[i].t_start)))
            throw std::invalid_argument("DetuningSchedule: segments must be contiguous");
    }
}

bool DetuningSchedule::covers(double t0, double t1) const {
    if (segments.empty())
        return false;
    return segments.front().t_start <= t0 + 1e-15 && segments.back().t_end >= t1 - 1e-15;
}

DetuningSchedule DetuningSchedule::constant(double delta, double t0, double t1) {
    DetuningSchedule s;
    s.segments.push_back({t0, t1, delta, delta});
    return s;
}

DetuningSchedule DetuningSchedule::hold_then_resonance(double delta_hold, double t_switch,
                                                       double edge, double t_end) {
    DetuningSchedule s;
    s.segments.push_back({0.0, t_switch, delta_hold, delta_hold});
    s.segments.push_back({t_switch, t_switch + edge, delta_hold, 0.0});
    s.segments.push_back({t_switch + edge, t_end, 0.0, 0.0});
    return s;
}

std::vector<double> pack_state(std::complex<double> cavity, const SpinEnsembleState& spins) {
    const std::size_t nb = spins.size();
    std::vector<double> y(2 + 3 * nb);
    y[0] = cavity.real();
    y[1] = cavity.imag();
    for (std::size_t j = 0; j < nb; ++j) {
        y[2 + 2 * j] = spins.coherences[j].real();
        y[3 + 2 * j] = spins.coherences[j].imag();
        y[2 + 2 * nb + j] = spins.inversions[j];
    }
    return y;
}

void unpack_state(std::span<const double> state, std::complex<double>& cavity,
                  SpinEnsembleState& spins) {
    const std::size_t nb = (state.size() - 2) / 3;
    cavity = {state[0], state[1]};
    spins.coherences.resize(nb);
    spins.inversions.resize(nb);
    for (std::size_t j = 0; j < nb; ++j) {
        spins.coherences[j] = {state[2 + 2 * j], state[3 + 2 * j]};
        spins.inversions[j] = state[2 + 2 * nb + j];
    }
}

void derivatives(const ensemble::SystemParams& params, const ensemble::BinnedEnsemble& bins,
                 std::span<const double> state, std::complex<double> eta, double delta,
                 double frame_frequency, std::span<double> dstate) {
    const std::size_t nb = bins.size();
    const double g0 = bins.single_spin_coupling;
    const double kappa = params.cavity_halfwidth;
    const double gamma = params.spin_halfwidth;
    const double dc = params.cavity_frequency - frame_frequency;

    const double ar = state[0], ai = state[1];

    // cavity sum: -i g0 sum n_j s-_j
    double sum_r = 0.0, sum_i = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
        sum_r += bins.bin_counts[j] * state[2 + 2 * j];
        sum_i += bins.bin_counts[j] * state[3 + 2 * j];
    }
    dstate[0] = -kappa * ar + dc * ai + g0 * sum_i + eta.real();
    dstate[1] = -kappa * ai - dc * ar - g0 * sum_r + eta.imag();

    for (std::size_t j = 0; j < nb; ++j) {
        const double ds = (bins.bin_frequencies[j] + delta) - frame_frequency;
        const double sr = state[2 + 2 * j];
        const double si = state[3 + 2 * j];
        const double sz = state[2 + 2 * nb + j];
        // s-' = -(i ds + gamma) s- + i g0 a sz
        dstate[2 + 2 * j] = -gamma * sr + ds * si - g0 * ai * sz;
        dstate[3 + 2 * j] = -gamma * si - ds * sr + g0 * ar * sz;
        // sz' = -4 g0 Im(conj(a) s-)
        dstate[2 + 2 * nb + j] = -4.0 * g0 * (ar * si - ai * sr);
    }
}

Trajectory integrate(const ensemble::SystemParams& params,
                     const ensemble::BinnedEnsemble& bins, const SpinEnsembleState& initial,
                     std::complex<double> initial_cavity, const pulses::DriveWaveform& drive,
                     const DetuningSchedule& schedule, double t_start, double t_end,
                     double output_dt, const IntegratorOptions& options) {
    if (initial.size() != bins.size())
        throw std::invalid_argument("integrate: state and ensemble bin counts differ");
    if (!(t_end > t_start))
        throw std::invalid_argument("integrate: t_end must exceed t_start");
    if (!drive.empty() && drive.sample_period > output_dt)
        throw std::invalid_argument("integrate: drive sample rate below output rate");
    if (!schedule.segments.empty() && !schedule.covers(t_start, t_end))
        throw std::invalid_argument("integrate: schedule does not cover the time span");

    const double frame = drive.empty() ? params.cavity_frequency : drive.carrier_frequency;
    const double n_total = bins.count_sum();

    Trajectory traj;
    traj.frame_frequency = frame;
    const auto n_out = static_cast<std::size_t>(std::floor((t_end - t_start) / output_dt)) + 1;
    traj.times.reserve(n_out);
    traj.cavity_amplitude.reserve(n_out);
    traj.inversion.reserve(n_out);
    traj.transverse_magnitude.reserve(n_out);

    std::vector<double> y = pack_state(initial_cavity, initial);
    const std::size_t nb = bins.size();

    ode::Options oopt;
    oopt.rel_tol = options.rel_tol;
    oopt.abs_tol = options.abs_tol;
    oopt.max_step = options.max_step;
    oopt.max_steps = options.max_steps;

    const auto rhs = [&](double t, std::span<const double> yy, std::span<double> dy) {
        derivatives(params, bins, yy, drive.at(t - t_start), schedule.at(t), frame, dy);
    };
    const auto emit = [&](double t, std::span<const double> yy) {
        traj.times.push_back(t);
        traj.cavity_amplitude.emplace_back(yy[0], yy[1]);
        double szsum = 0.0, smr = 0.0, smi = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            szsum += bins.bin_counts[j] * yy[2 + 2 * nb + j];
            smr += bins.bin_counts[j] * yy[2 + 2 * j];
            smi += bins.bin_counts[j] * yy[3 + 2 * j];
        }
        traj.inversion.push_back(szsum / n_total);
        traj.transverse_magnitude.push_back(std::hypot(smr, smi) / n_total);
    };

    ode::integrate_sampled(rhs, y, t_start, t_end, output_dt, oopt, emit);
    return traj;
}

std::complex<double> steady_state_transmission(const ensemble::SystemParams& params,
                                               const ensemble::BinnedEnsemble& bins,
                                               double omega_p, double p, double drive_amp,
                                               double delta) {
    if (std::abs(p) > 1.0)
        throw std::invalid_argument("steady_state_transmission: |p| must be <= 1");
    const double g0 = bins.single_spin_coupling;
    const std::complex<double> dc(0.0, params.cavity_frequency - omega_p);
    std::complex<double> denom = params.cavity_halfwidth + dc;
    for (std::size_t j = 0; j < bins.size(); ++j) {
        const double ds = (bins.bin_frequencies[j] + delta) - omega_p;
        denom += g0 * g0 * bins.bin_counts[j] * (-p) /
                 std::complex<double>(params.spin_halfwidth, ds);
    }
    return drive_amp / denom;
}

bool threshold_check(double p, double cooperativity) {
    return p * cooperativity > 1.0;
}

std::optional<BurstRecord> extract_burst(const Trajectory& traj, double t_min) {
    std::size_t best = traj.size();
    double best_amp = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.times[i] < t_min)
            continue;
        const double amp = std::abs(traj.cavity_amplitude[i]);
        if (best == traj.size() || amp > best_amp) {  // strict > keeps the earlier tie
            best = i;
            best_amp = amp;
        }
    }
    if (best == traj.size() || best_amp == 0.0)
        return std::nullopt;

    BurstRecord rec;
    rec.i_d = traj.cavity_amplitude[best].real();
    rec.q_d = traj.cavity_amplitude[best].imag();
    rec.max_amp = std::hypot(rec.i_d, rec.q_d);
    rec.phase = std::atan2(rec.q_d, rec.i_d);
    rec.t_d = traj.times[best];

    // parabolic refinement through the three samples around the peak
    if (best > 0 && best + 1 < traj.size() && traj.times[best - 1] >= t_min) {
        const double ym = std::abs(traj.cavity_amplitude[best - 1]);
        const double y0 = best_amp;
        const double yp = std::abs(traj.cavity_amplitude[best + 1]);
        const double denom = ym - 2.0 * y0 + yp;
        if (denom < 0.0) {
            const double shift = 0.5 * (ym - yp) / denom;
            const double dt = traj.times[best + 1] - traj.times[best];
            rec.t_d += std::clamp(shift, -0.5, 0.5) * dt;
        }
    }
    return rec;
}

} // namespace srsim::dynamics
