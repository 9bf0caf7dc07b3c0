#include "srsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "srsim/errors.hpp"
#include "srsim/math.hpp"
#include "srsim/units.hpp"

namespace srsim::calibration {

void PortCouplings::validate() const {
    if (!(kappa1 >= 0.0) || !(kappa2 >= 0.0))
        throw std::invalid_argument("PortCouplings: couplings must be non-negative");
    if (!(kappa1 + kappa2 > 0.0) || kappa1 + kappa2 > kappa_tot * (1.0 + 1e-12))
        throw std::invalid_argument("PortCouplings: need 0 < kappa1+kappa2 <= kappa_tot");
    for (double a : {a1, a2, a3})
        if (!(a > 0.0) || a > 1.0 + 1e-12)
            throw std::invalid_argument("PortCouplings: attenuation factors must be in (0, 1]");
}

SParamsOnResonance s_parameters_on_resonance(const PortCouplings& c) {
    c.validate();
    SParamsOnResonance out;
    const double r1 = 2.0 * c.kappa1 / c.kappa_tot - 1.0;
    const double r2 = 2.0 * c.kappa2 / c.kappa_tot - 1.0;
    const double t = 2.0 * std::sqrt(c.kappa1 * c.kappa2) / c.kappa_tot;
    out.s11 = c.a1 * c.a1 * r1 * r1;
    out.s31 = c.a1 * c.a3 * t * t;
    out.s32 = c.a2 * c.a3 * r2 * r2;
    return out;
}

namespace {
double reflection(double kappa_port, double kappa_tot, double detuning) {
    const std::complex<double> s =
        2.0 * kappa_port / std::complex<double>(kappa_tot, detuning) - 1.0;
    return std::norm(s);
}
} // namespace

double s11_trace(const PortCouplings& c, double detuning) {
    return c.a1 * c.a1 * reflection(c.kappa1, c.kappa_tot, detuning);
}

double s31_trace(const PortCouplings& c, double detuning) {
    return c.a1 * c.a3 * 4.0 * c.kappa1 * c.kappa2 /
           (c.kappa_tot * c.kappa_tot + detuning * detuning);
}

double s32_trace(const PortCouplings& c, double detuning) {
    return c.a2 * c.a3 * reflection(c.kappa2, c.kappa_tot, detuning);
}

namespace {

// peak + baseline Lorentzian in power units: b + h * ktot^2/(ktot^2 + (w-w0)^2)
struct LorentzianStage {
    double center_hz = 0.0;
    double hwhm_rad = 0.0;
    double height = 0.0;
    double baseline = 0.0;
    fit::FitResult raw;
};

LorentzianStage fit_lorentzian_peak(const Trace& trace) {
    const std::size_t n = trace.frequency.size();
    if (n < 5 || trace.value_db.size() != n)
        throw std::invalid_argument("fit_port_couplings: trace too short");

    std::vector<double> power(n);
    for (std::size_t i = 0; i < n; ++i)
        power[i] = db_to_power(trace.value_db[i]);

    const auto it_max = std::max_element(power.begin(), power.end());
    const auto it_min = std::min_element(power.begin(), power.end());
    if (*it_max - *it_min < 1e-12 * std::max(1.0, *it_max))
        throw FitError("fit_port_couplings: flat trace, no resonance to fit");
    const double f_peak = trace.frequency[static_cast<std::size_t>(it_max - power.begin())];
    const double f_span = trace.frequency.back() - trace.frequency.front();

    // params: center Hz, hwhm Hz, height, baseline
    const auto residual = [&](std::span<const double> p, std::vector<double>& r) {
        r.resize(n);
        const double hw = p[1];
        for (std::size_t i = 0; i < n; ++i) {
            const double d = trace.frequency[i] - p[0];
            const double model = p[3] + p[2] * hw * hw / (hw * hw + d * d);
            r[i] = model - power[i];
        }
    };
    auto res = fit::levenberg_marquardt(residual, n,
                                        {f_peak, 0.05 * f_span, *it_max - *it_min, *it_min});
    if (!res.converged)
        throw FitError("fit_port_couplings: kappa_tot Lorentzian stage did not converge, "
                       "residual norm " + std::to_string(res.residual_norm));
    LorentzianStage out;
    out.center_hz = res.params[0];
    out.hwhm_rad = hz_to_rad(std::abs(res.params[1]));
    out.height = res.params[2];
    out.baseline = res.params[3];
    out.raw = std::move(res);
    return out;
}

// reflection dip: baseline * |2 k/(ktot + i d) - 1|^2; fit k and baseline
double fit_reflection_dip(const Trace& trace, double center_hz, double kappa_tot,
                          double kappa_guess, double* residual_out) {
    const std::size_t n = trace.frequency.size();
    if (n < 5 || trace.value_db.size() != n)
        throw std::invalid_argument("fit_port_couplings: trace too short");
    std::vector<double> power(n);
    for (std::size_t i = 0; i < n; ++i)
        power[i] = db_to_power(trace.value_db[i]);

    const double base0 = *std::max_element(power.begin(), power.end());
    const auto residual = [&](std::span<const double> p, std::vector<double>& r) {
        r.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = hz_to_rad(trace.frequency[i] - center_hz);
            r[i] = p[1] * reflection(p[0], kappa_tot, d) - power[i];
        }
    };
    auto res = fit::levenberg_marquardt(residual, n, {kappa_guess, base0});
    if (!res.converged)
        throw FitError("fit_port_couplings: reflection dip stage did not converge, "
                       "residual norm " + std::to_string(res.residual_norm));
    if (residual_out)
        *residual_out = res.residual_norm;
    return std::abs(res.params[0]);
}

} // namespace

PortCouplings fit_port_couplings(const Trace& s11, const Trace& s31, const Trace& s32,
                                 const PortCouplings& guess,
                                 PortFitDiagnostics* diagnostics) {
    if (s31.frequency.empty())
        throw std::invalid_argument("fit_port_couplings: S31 trace required for kappa_tot");

    const auto lor = fit_lorentzian_peak(s31);
    const double kappa_tot = lor.hwhm_rad;

    // dip depths: start from the guess, defaulting to the under-coupled branch
    const double g1 = guess.kappa1 > 0.0 ? guess.kappa1 : 0.25 * kappa_tot;
    const double g2 = guess.kappa2 > 0.0 ? guess.kappa2 : 0.25 * kappa_tot;
    double r11 = 0.0, r32 = 0.0;
    PortCouplings out = guess;
    out.kappa_tot = kappa_tot;
    out.kappa1 = fit_reflection_dip(s11, lor.center_hz, kappa_tot, g1, &r11);
    out.kappa2 = fit_reflection_dip(s32, lor.center_hz, kappa_tot, g2, &r32);

    if (diagnostics) {
        diagnostics->resonance_frequency = lor.center_hz;
        diagnostics->residual_norm = std::hypot(lor.raw.residual_norm, std::hypot(r11, r32));
        diagnostics->covariance = lor.raw.covariance;
        diagnostics->converged = true;
    }
    return out;
}

double pulse_photons(double power_in, double omega_c, double a_line, double kappa_in,
                     double kappa_tot, double dt) {
    if (!(power_in >= 0.0) || !(omega_c > 0.0) || !(a_line > 0.0) || !(kappa_in > 0.0) ||
        !(kappa_tot > 0.0) || !(dt >= 0.0))
        throw std::invalid_argument("pulse_photons: inputs must be positive");
    const double charge = 1.0 - std::exp(-dt * kappa_tot);
    return power_in / (hbar * omega_c) * a_line * 2.0 * kappa_in / (kappa_tot * kappa_tot) *
           charge * charge;
}

double cavity_charging(double eta_d, double kappa_tot, double t) {
    if (t < 0.0)
        throw std::invalid_argument("cavity_charging: t must be >= 0");
    return eta_d / kappa_tot * (1.0 - std::exp(-t * kappa_tot));
}

double drive_from_power(double power_in, double omega_c, double kappa_in) {
    return std::sqrt(2.0 * kappa_in * power_in / (hbar * omega_c));
}

void StageLadder::validate() const {
    if (stages.empty())
        throw std::invalid_argument("StageLadder: at least one stage required");
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (!(stages[i].temperature > 0.0))
            throw std::invalid_argument("StageLadder: temperatures must be positive");
        if (i > 0 && stages[i].temperature >= stages[i - 1].temperature)
            throw std::invalid_argument("StageLadder: temperatures must decrease down the list");
    }
}

double bose_occupancy(double temperature, double omega) {
    if (!(temperature > 0.0))
        return 0.0;
    return 1.0 / std::expm1(hbar * omega / (k_boltzmann * temperature));
}

LadderResult thermal_ladder(const StageLadder& ladder, double omega_c) {
    ladder.validate();
    LadderResult out;
    out.occupancy.reserve(ladder.stages.size());
    double carry = 0.0;
    for (std::size_t i = 0; i < ladder.stages.size(); ++i) {
        const double own = bose_occupancy(ladder.stages[i].temperature, omega_c);
        const double attenuated =
            (i == 0) ? 0.0
                     : db_to_power(ladder.stages[i - 1].attenuation_db_to_next) * carry;
        carry = own + attenuated;
        out.occupancy.push_back(carry);
    }
    out.base = carry;
    return out;
}

double dispersive_shift(double g_coll, double delta, double p, bool* dispersive_regime) {
    if (delta == 0.0)
        throw std::invalid_argument("dispersive_shift: delta must be nonzero");
    if (dispersive_regime)
        *dispersive_regime = std::abs(delta) >= 10.0 * std::abs(g_coll);
    return g_coll * g_coll * p / delta;
}

DecayFit fit_exponential(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("fit_exponential: need at least 3 points");
    std::vector<double> logy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0))
            throw std::invalid_argument("fit_exponential: ordinates must be positive");
        logy[i] = std::log(y[i]);
    }
    const auto line = fit::fit_line(x, logy);
    DecayFit out;
    out.amplitude = std::exp(line.intercept);
    if (std::abs(line.slope) < 1e-300 ||
        std::abs(line.slope) * (x.back() - x.front()) < 1e-12) {
        out.degenerate = true;  // constant series, tau -> infinity
        out.timescale = std::numeric_limits<double>::infinity();
        return out;
    }
    out.timescale = -1.0 / line.slope;
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double model = out.amplitude * std::exp(-x[i] / out.timescale);
        ss += (model - y[i]) * (model - y[i]);
    }
    out.residual_norm = std::sqrt(ss);
    return out;
}

DecayFit fit_stretched_exponential(std::span<const double> x, std::span<const double> y,
                                   double exponent) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("fit_stretched_exponential: need at least 3 points");
    if (!(exponent > 0.0))
        throw std::invalid_argument("fit_stretched_exponential: exponent must be positive");

    // seed from the log-space line against x^exponent
    std::vector<double> xs(x.size()), logy(x.size());
    bool positive = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xs[i] = std::pow(std::max(x[i], 0.0), exponent);
        positive = positive && y[i] > 0.0;
        logy[i] = positive ? std::log(std::max(y[i], 1e-300)) : 0.0;
    }
    double amp0 = y[0], tau0 = x[x.size() / 2] + 1e-300;
    if (positive) {
        const auto line = fit::fit_line(xs, logy);
        if (line.slope < 0.0) {
            amp0 = std::exp(line.intercept);
            tau0 = std::pow(-1.0 / line.slope, 1.0 / exponent);
        }
    }

    const std::size_t n = x.size();
    const auto residual = [&](std::span<const double> p, std::vector<double>& r) {
        r.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double arg = std::pow(std::max(x[i], 0.0) / std::abs(p[1]), exponent);
            r[i] = p[0] * std::exp(-arg) - y[i];
        }
    };
    auto res = fit::levenberg_marquardt(residual, n, {amp0, tau0});
    DecayFit out;
    out.amplitude = res.params[0];
    out.timescale = std::abs(res.params[1]);
    out.residual_norm = res.residual_norm;
    double spread = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        spread = std::max(spread, std::abs(y[i] - y[0]));
    out.degenerate = spread < 1e-12 * std::max(1.0, std::abs(y[0]));
    return out;
}

namespace {
double median_of(std::vector<double> v) {
    if (v.empty())
        throw std::invalid_argument("median of empty set");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}
} // namespace

stochastic::ShotSet rescale_delay_times(const stochastic::ShotSet& records,
                                        double reference_amp, double band_mads,
                                        RescaleDiagnostics* diagnostics) {
    const std::size_t n = records.records.size();
    if (n < 2)
        throw std::invalid_argument("rescale_delay_times: need at least 2 records");
    if (!(reference_amp > 0.0))
        throw std::invalid_argument("rescale_delay_times: reference_amp must be positive");
    for (const auto& r : records.records)
        if (!(r.max_amp > 0.0))
            throw std::invalid_argument("rescale_delay_times: records need positive max_amp");

    // amplitude band: median +- band_mads * MAD
    std::vector<double> amps(n);
    for (std::size_t i = 0; i < n; ++i)
        amps[i] = records.records[i].max_amp;
    const double med = median_of(amps);
    std::vector<double> devs(n);
    for (std::size_t i = 0; i < n; ++i)
        devs[i] = std::abs(amps[i] - med);
    const double mad = median_of(devs);

    std::vector<std::size_t> keep, excluded;
    for (std::size_t i = 0; i < n; ++i) {
        if (mad > 0.0 && std::abs(amps[i] - med) > band_mads * mad)
            excluded.push_back(i);
        else
            keep.push_back(i);
    }
    if (keep.size() < 2)
        throw std::invalid_argument("rescale_delay_times: amplitude band excluded everything");

    // fit t_d = t0 + C / max_amp on the kept records; with no amplitude
    // spread the transform degenerates to the identity (C = 0)
    std::vector<double> inv_amp(keep.size()), td(keep.size());
    double amp_lo = amps[keep[0]], amp_hi = amps[keep[0]];
    for (std::size_t k = 0; k < keep.size(); ++k) {
        inv_amp[k] = 1.0 / amps[keep[k]];
        td[k] = records.records[keep[k]].t_d;
        amp_lo = std::min(amp_lo, amps[keep[k]]);
        amp_hi = std::max(amp_hi, amps[keep[k]]);
    }
    double c = 0.0, t0 = 0.0;
    if (amp_hi - amp_lo > 1e-9 * med) {
        const auto line = fit::fit_line(inv_amp, td);
        c = line.slope;
        t0 = line.intercept;
    } else {
        t0 = median_of(td);
    }

    stochastic::ShotSet out;
    out.trigger_photons = records.trigger_photons;
    out.displacement_eta = records.displacement_eta;
    out.records.reserve(keep.size());
    for (std::size_t k : keep) {
        auto rec = records.records[k];
        rec.t_d = rec.t_d - c / rec.max_amp + c / reference_amp;
        out.records.push_back(rec);
        if (k < records.thetas.size())
            out.thetas.push_back(records.thetas[k]);
        if (k < records.phis.size())
            out.phis.push_back(records.phis[k]);
    }
    if (diagnostics) {
        diagnostics->t0 = t0;
        diagnostics->hyperbola_c = c;
        diagnostics->excluded = std::move(excluded);
    }
    return out;
}

stochastic::ShotSet correct_phase_drift(const stochastic::ShotSet& records,
                                        PhaseDriftDiagnostics* diagnostics) {
    const std::size_t n = records.records.size();
    if (n < 2)
        throw std::invalid_argument("correct_phase_drift: need at least 2 records");

    // unwrap phases along increasing t_d before the linear fit
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records.records[a].t_d < records.records[b].t_d;
    });
    if (records.records[order.front()].t_d == records.records[order.back()].t_d)
        throw std::invalid_argument("correct_phase_drift: records must span distinct t_d");

    std::vector<double> td(n), phi(n);
    double prev = records.records[order[0]].phase;
    double offset = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& rec = records.records[order[k]];
        double ph = rec.phase + offset;
        while (ph - prev > pi) {
            ph -= two_pi;
            offset -= two_pi;
        }
        while (ph - prev < -pi) {
            ph += two_pi;
            offset += two_pi;
        }
        td[k] = rec.t_d;
        phi[k] = ph;
        prev = ph;
    }
    const auto line = fit::fit_line(td, phi);

    stochastic::ShotSet out = records;
    for (auto& rec : out.records)
        rec.phase = math::wrap_angle(rec.phase - (line.slope * rec.t_d + line.intercept));
    if (diagnostics) {
        diagnostics->slope = line.slope;
        diagnostics->intercept = line.intercept;
    }
    return out;
}

} // namespace srsim::calibration
