#include "srsim/inversion.hpp"

#include <cmath>
#include <stdexcept>

namespace srsim::pulses {

double inversion_efficiency(const dynamics::Trajectory& traj, double pulse_end) {
    if (traj.size() == 0)
        throw std::invalid_argument("inversion_efficiency: empty trajectory");
    std::size_t idx = traj.size() - 1;
    if (pulse_end > 0.0) {
        for (std::size_t i = 0; i < traj.size(); ++i) {
            if (traj.times[i] >= pulse_end) {
                idx = i;
                break;
            }
        }
    }
    return 0.5 * (traj.inversion[idx] + 1.0);
}

InversionScanResult scan_inversion_amplitude(const ensemble::SystemParams& params,
                                             const ensemble::BinnedEnsemble& bins,
                                             ChirpSpec chirp,
                                             const std::vector<double>& amplitudes,
                                             double dt,
                                             const dynamics::IntegratorOptions& options) {
    if (amplitudes.empty())
        throw std::invalid_argument("scan_inversion_amplitude: no amplitudes given");

    InversionScanResult result;
    result.points.reserve(amplitudes.size());
    const auto initial = dynamics::SpinEnsembleState::ground(bins.size());
    const double t_end = chirp.duration + 10e-9;

    for (double amp : amplitudes) {
        chirp.peak_target_amplitude = amp;
        const auto target = chirp_target(chirp, dt);
        const auto drive =
            compensate_drive(target, params, 0.0, dt, params.cavity_frequency);
        const auto traj = dynamics::integrate(
            params, bins, initial, {0.0, 0.0}, drive,
            dynamics::DetuningSchedule::constant(0.0, 0.0, t_end), 0.0, t_end, dt, options);
        InversionScanPoint point;
        point.amplitude = amp;
        point.efficiency = inversion_efficiency(traj, chirp.duration);
        point.p_final = 2.0 * point.efficiency - 1.0;
        result.points.push_back(point);
        if (point.efficiency > result.best.efficiency)
            result.best = point;
    }
    return result;
}

} // namespace srsim::pulses
