#include "srsim/pulses.hpp"

#include <cmath>
#include <stdexcept>

#include "srsim/units.hpp"

namespace srsim::pulses {

std::complex<double> DriveWaveform::at(double t) const {
    if (samples.empty() || t < 0.0)
        return {};
    const double pos = t / sample_period;
    const auto k = static_cast<std::size_t>(pos);
    if (k >= samples.size())
        return {};
    const double frac = pos - static_cast<double>(k);
    const std::complex<double> lo = samples[k];
    const std::complex<double> hi = (k + 1 < samples.size()) ? samples[k + 1]
                                                             : std::complex<double>{};
    return lo + frac * (hi - lo);
}

double DriveWaveform::energy() const {
    double e = 0.0;
    for (const auto& s : samples)
        e += std::norm(s);
    return e * sample_period;
}

void DriveWaveform::validate() const {
    if (!(sample_period > 0.0))
        throw std::invalid_argument("DriveWaveform: sample_period must be positive");
    for (const auto& s : samples)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw std::invalid_argument("DriveWaveform: non-finite sample");
}

void ChirpSpec::validate() const {
    if (!(duration > 0.0))
        throw std::invalid_argument("ChirpSpec: duration must be positive");
    if (!(envelope_fwhm > 0.0))
        throw std::invalid_argument("ChirpSpec: envelope_fwhm must be positive");
    if (sweep_span < 0.0)
        throw std::invalid_argument("ChirpSpec: sweep_span must be non-negative");
}

std::vector<std::complex<double>> chirp_target(const ChirpSpec& spec, double dt) {
    spec.validate();
    if (!(dt > 0.0) || dt > spec.duration / 1000.0)
        throw std::invalid_argument("chirp_target: dt must satisfy dt <= duration/1000");

    const auto n = static_cast<std::size_t>(std::llround(spec.duration / dt)) + 1;
    const double sigma = spec.envelope_fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double mid = 0.5 * spec.duration;
    // d(phi)/dt = center + (sweep_span/duration) * (t - mid)
    const double rate = spec.sweep_span / spec.duration;

    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = static_cast<double>(k) * dt - mid;
        const double env = spec.peak_target_amplitude * std::exp(-tau * tau / (2.0 * sigma * sigma));
        const double phase = spec.center * tau + 0.5 * rate * tau * tau;
        out[k] = std::polar(env, phase);
    }
    return out;
}

DriveWaveform compensate_drive(const std::vector<std::complex<double>>& a_target,
                               const ensemble::SystemParams& params, double delta_c,
                               double dt, double carrier_frequency) {
    if (a_target.size() < 3)
        throw std::invalid_argument("compensate_drive: need at least 3 samples");
    if (!(dt > 0.0))
        throw std::invalid_argument("compensate_drive: dt must be positive");
    const std::size_t n = a_target.size();
    const std::complex<double> damping(params.cavity_halfwidth, delta_c);

    DriveWaveform out;
    out.sample_period = dt;
    out.carrier_frequency = carrier_frequency;
    out.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> da;
        if (k == 0)
            da = (a_target[1] - a_target[0]) / dt;
        else if (k == n - 1)
            da = (a_target[n - 1] - a_target[n - 2]) / dt;
        else
            da = (a_target[k + 1] - a_target[k - 1]) / (2.0 * dt);
        out.samples[k] = da + damping * a_target[k];
    }
    return out;
}

DriveWaveform rectangular_pulse(double duration, double amplitude, double phase, double dt,
                                double carrier_frequency) {
    if (!(duration > 0.0))
        throw std::invalid_argument("rectangular_pulse: duration must be positive");
    if (!(dt > 0.0))
        throw std::invalid_argument("rectangular_pulse: dt must be positive");
    DriveWaveform out;
    out.sample_period = dt;
    out.carrier_frequency = carrier_frequency;
    const auto n = static_cast<std::size_t>(std::llround(duration / dt));
    out.samples.assign(std::max<std::size_t>(n, 1), std::polar(amplitude, phase));
    return out;
}

DriveWaveform delayed(const DriveWaveform& pulse, double delay) {
    pulse.validate();
    if (delay < 0.0)
        throw std::invalid_argument("delayed: delay must be non-negative");
    const auto pad = static_cast<std::size_t>(std::llround(delay / pulse.sample_period));
    DriveWaveform out;
    out.sample_period = pulse.sample_period;
    out.carrier_frequency = pulse.carrier_frequency;
    out.samples.assign(pad, {});
    out.samples.insert(out.samples.end(), pulse.samples.begin(), pulse.samples.end());
    return out;
}

DriveWaveform pulse_train(const DriveWaveform& pulse, double period, int count) {
    pulse.validate();
    if (count < 1)
        throw std::invalid_argument("pulse_train: count must be >= 1");
    if (period < pulse.duration())
        throw std::invalid_argument("pulse_train: period shorter than pulse");

    const auto n_period = static_cast<std::size_t>(std::llround(period / pulse.sample_period));
    DriveWaveform out;
    out.sample_period = pulse.sample_period;
    out.carrier_frequency = pulse.carrier_frequency;
    out.samples.assign(n_period * static_cast<std::size_t>(count), {});
    for (int rep = 0; rep < count; ++rep) {
        const std::size_t base = n_period * static_cast<std::size_t>(rep);
        for (std::size_t k = 0; k < pulse.samples.size(); ++k)
            out.samples[base + k] = pulse.samples[k];
    }
    return out;
}

} // namespace srsim::pulses
