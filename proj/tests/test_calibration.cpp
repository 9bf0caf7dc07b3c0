#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "srsim/calibration.hpp"
#include "srsim/csvio.hpp"
#include "srsim/dynamics.hpp"
#include "srsim/errors.hpp"
#include "srsim/math.hpp"
#include "srsim/rng.hpp"
#include "srsim/units.hpp"
#include "support.hpp"

using namespace srsim;
using calibration::PortCouplings;
using calibration::Trace;

TEST_CASE("on-resonance s-parameters") {
    SUBCASE("critical coupling nulls the reflection") {
        PortCouplings c{0.5e6, 0.2e6, 1.0e6, 1.0, 1.0, 1.0};
        CHECK(calibration::s_parameters_on_resonance(c).s11 == doctest::Approx(0.0));
    }
    SUBCASE("no probe coupling kills the transmission") {
        PortCouplings c{0.3e6, 0.0, 1.0e6, 1.0, 1.0, 1.0};
        CHECK(calibration::s_parameters_on_resonance(c).s31 == doctest::Approx(0.0));
    }
    SUBCASE("probe-line dip depth from the measured couplings") {
        // kappa2/2pi = 59 kHz against kappa_tot/2pi = 586 kHz: shallow dip
        PortCouplings c{hz_to_rad(182e3), hz_to_rad(59e3), hz_to_rad(586e3), 1.0, 1.0, 1.0};
        CHECK(calibration::s_parameters_on_resonance(c).s32 ==
              doctest::Approx(0.6378).epsilon(1e-3));
    }
}

namespace {

Trace synth_trace(const PortCouplings& c, int which, double f0_hz, double noise,
                  Rng* rng) {
    Trace t;
    const int n = 401;
    const double span = 6.0 * rad_to_hz(c.kappa_tot);
    for (int i = 0; i < n; ++i) {
        const double f = f0_hz - span + 2.0 * span * i / (n - 1);
        const double d = hz_to_rad(f - f0_hz);
        double p = which == 0   ? calibration::s11_trace(c, d)
                   : which == 1 ? calibration::s31_trace(c, d)
                                : calibration::s32_trace(c, d);
        if (rng)
            p *= 1.0 + noise * rng->normal();
        t.frequency.push_back(f);
        t.value_db.push_back(power_to_db(p));
    }
    return t;
}

} // namespace

TEST_CASE("port coupling fit") {
    const double f0 = 3.105e9;
    PortCouplings truth{hz_to_rad(182e3), hz_to_rad(59e3), hz_to_rad(586e3),
                        db_to_power(-3.0), db_to_power(-5.0), db_to_power(-4.0)};

    SUBCASE("noiseless traces recover exactly") {
        const auto s11 = synth_trace(truth, 0, f0, 0.0, nullptr);
        const auto s31 = synth_trace(truth, 1, f0, 0.0, nullptr);
        const auto s32 = synth_trace(truth, 2, f0, 0.0, nullptr);
        const auto fit = calibration::fit_port_couplings(s11, s31, s32, {});
        CHECK(fit.kappa_tot == doctest::Approx(truth.kappa_tot).epsilon(1e-6));
        CHECK(fit.kappa1 == doctest::Approx(truth.kappa1).epsilon(1e-6));
        CHECK(fit.kappa2 == doctest::Approx(truth.kappa2).epsilon(1e-6));
    }

    SUBCASE("1% noise recovers within 3%") {
        Rng rng(77);
        const auto s11 = synth_trace(truth, 0, f0, 0.01, &rng);
        const auto s31 = synth_trace(truth, 1, f0, 0.01, &rng);
        const auto s32 = synth_trace(truth, 2, f0, 0.01, &rng);
        calibration::PortFitDiagnostics diag;
        const auto fit = calibration::fit_port_couplings(s11, s31, s32, {}, &diag);
        CHECK(fit.kappa_tot == doctest::Approx(truth.kappa_tot).epsilon(0.03));
        CHECK(fit.kappa1 == doctest::Approx(truth.kappa1).epsilon(0.03));
        CHECK(fit.kappa2 == doctest::Approx(truth.kappa2).epsilon(0.03));
        CHECK(diag.converged);
        CHECK(diag.resonance_frequency == doctest::Approx(f0).epsilon(1e-6));
    }

    SUBCASE("flat trace is a fit error") {
        Trace flat;
        for (int i = 0; i < 100; ++i) {
            flat.frequency.push_back(f0 + i * 1e3);
            flat.value_db.push_back(-20.0);
        }
        CHECK_THROWS_AS(calibration::fit_port_couplings(flat, flat, flat, {}), FitError);
    }
}

TEST_CASE("pulse photon estimates reproduce the calibrated values") {
    const double omega_c = hz_to_rad(3.105e9);

    SUBCASE("probe line, weakest pulse: about 50 photons") {
        const double n = calibration::pulse_photons(1.83e-9, omega_c, db_to_power(-49.5),
                                                    hz_to_rad(59e3), hz_to_rad(586e3),
                                                    100e-9);
        CHECK(n == doctest::Approx(50.0).epsilon(0.10));
    }
    SUBCASE("pump line, strong pulses: about 1.5e9 photons") {
        const double n = calibration::pulse_photons(2.1e-6, omega_c, db_to_power(-10.6),
                                                    hz_to_rad(182e3), hz_to_rad(516e3),
                                                    100e-9);
        CHECK(n == doctest::Approx(1.5e9).epsilon(0.10));
    }
    SUBCASE("zero duration charges nothing") {
        CHECK(calibration::pulse_photons(1e-9, omega_c, 1.0, 1e5, 1e6, 0.0) == 0.0);
    }
}

TEST_CASE("cavity charging curve") {
    const double kappa_tot = hz_to_rad(586e3);
    const double eta = 4.2e8;
    CHECK(calibration::cavity_charging(eta, kappa_tot, 10.0 / kappa_tot) ==
          doctest::Approx(eta / kappa_tot).epsilon(1e-4));
    CHECK(calibration::cavity_charging(eta, kappa_tot, 1.0 / kappa_tot) ==
          doctest::Approx((1.0 - std::exp(-1.0)) * eta / kappa_tot).epsilon(1e-12));

    SUBCASE("matches the integrated empty cavity to 0.1%") {
        auto params = test::measured_params();
        params.cavity_halfwidth = kappa_tot;
        auto bins = ensemble::discretize(params.distribution, params, 3, 1.0);
        std::fill(bins.bin_counts.begin(), bins.bin_counts.end(), 0.0);
        const double dt = 0.05e-9;
        const auto pulse =
            pulses::rectangular_pulse(100e-9, eta, 0.0, dt, params.cavity_frequency);
        const auto traj = dynamics::integrate(
            params, bins, dynamics::SpinEnsembleState::ground(bins.size()), {0.0, 0.0},
            pulse, dynamics::DetuningSchedule::constant(0.0, 0.0, 100e-9), 0.0, 100e-9,
            1e-9);
        for (std::size_t i = 1; i < traj.size(); ++i) {
            const double t = traj.times[i];
            if (t > 99e-9)
                break;  // final sample sits on the interpolated pulse edge
            const double expected = calibration::cavity_charging(eta, kappa_tot, t);
            CHECK(std::abs(traj.cavity_amplitude[i]) ==
                  doctest::Approx(expected).epsilon(1e-3));
        }
    }
}

TEST_CASE("drive amplitude from incident power") {
    const double omega_c = hz_to_rad(3.105e9);
    const double eta = calibration::drive_from_power(1e-9, omega_c, hz_to_rad(59e3));
    CHECK(eta == doctest::Approx(std::sqrt(2.0 * hz_to_rad(59e3) * 1e-9 / (hbar * omega_c))));
}

TEST_CASE("thermal ladder") {
    const double omega_c = hz_to_rad(3.105e9);

    SUBCASE("pump line with the solenoid switch open gives ~3 photons") {
        // line starts at the 0.9 K stage where the switch opens
        calibration::StageLadder pump;
        pump.stages = {{0.9, -1.5}, {0.12, -2.0}, {0.025, 0.0}};
        const auto result = calibration::thermal_ladder(pump, omega_c);
        CHECK(result.base == doctest::Approx(3.0).epsilon(0.30));
        CHECK(result.occupancy.size() == 3);
        CHECK(result.occupancy.front() ==
              doctest::Approx(calibration::bose_occupancy(0.9, omega_c)));
    }
    SUBCASE("cold single stage holds no photons") {
        calibration::StageLadder cold;
        cold.stages = {{1e-6, 0.0}};
        CHECK(calibration::thermal_ladder(cold, omega_c).base == doctest::Approx(0.0));
    }
    SUBCASE("room-temperature stage approaches the classical limit") {
        calibration::StageLadder room;
        room.stages = {{296.0, 0.0}};
        const double expected = k_boltzmann * 296.0 / (hbar * omega_c);
        CHECK(calibration::thermal_ladder(room, omega_c).base ==
              doctest::Approx(expected).epsilon(1e-3));
        CHECK(calibration::thermal_ladder(room, omega_c).base ==
              doctest::Approx(1986.0).epsilon(1e-3));
    }
    SUBCASE("temperatures must decrease") {
        calibration::StageLadder bad;
        bad.stages = {{0.1, -1.0}, {4.0, 0.0}};
        CHECK_THROWS_AS(calibration::thermal_ladder(bad, omega_c), std::invalid_argument);
    }
}

TEST_CASE("dispersive shift") {
    const double g = hz_to_rad(5.17e6);
    const double delta = hz_to_rad(26e6);
    CHECK(calibration::dispersive_shift(g, delta, 0.0) == 0.0);
    CHECK(calibration::dispersive_shift(g, delta, 0.4) ==
          doctest::Approx(-calibration::dispersive_shift(g, delta, -0.4)));
    bool regime = true;
    calibration::dispersive_shift(g, 2.0 * g, 0.1, &regime);
    CHECK_FALSE(regime);

    SUBCASE("matches the steady-state dispersive limit within 5%") {
        const auto params = test::measured_params();
        const auto bins = ensemble::discretize(params.distribution, params, 1001, 4.0);
        const double chi = calibration::dispersive_shift(params.collective_coupling, delta,
                                                         -1.0);
        // locate the pulled resonance of the detuned ground-state ensemble
        const double f_c = params.cavity_frequency;
        const double span = 5.0 * params.cavity_halfwidth;
        double best = 0.0, best_w = f_c;
        for (int i = 0; i < 6001; ++i) {
            const double w = f_c - span + 2.0 * span * i / 6000;
            const double a = std::norm(
                dynamics::steady_state_transmission(params, bins, w, -1.0, 1.0, delta));
            if (a > best) {
                best = a;
                best_w = w;
            }
        }
        CHECK(best_w - f_c == doctest::Approx(chi).epsilon(0.05));
    }
}

TEST_CASE("fit round trips at 2% noise recover within 5%") {
    Rng rng(123);

    SUBCASE("plain exponential, tau = 7.6 ms") {
        std::vector<double> x, y;
        for (int i = 0; i < 40; ++i) {
            const double t = i * 1e-3;
            x.push_back(t);
            y.push_back(std::exp(-t / 7.6e-3) * (1.0 + 0.02 * rng.normal()));
        }
        const auto fit = calibration::fit_exponential(x, y);
        CHECK(fit.timescale == doctest::Approx(7.6e-3).epsilon(0.05));
        CHECK_FALSE(fit.degenerate);
    }

    SUBCASE("slow exponential, T1 = 134 s") {
        std::vector<double> x, y;
        for (int i = 0; i < 30; ++i) {
            const double t = i * 20.0;
            x.push_back(t);
            y.push_back(2.5 * std::exp(-t / 134.0) * (1.0 + 0.02 * rng.normal()));
        }
        const auto fit = calibration::fit_exponential(x, y);
        CHECK(fit.timescale == doctest::Approx(134.0).epsilon(0.05));
        CHECK(fit.amplitude == doctest::Approx(2.5).epsilon(0.05));
    }

    SUBCASE("stretched exponential with exponent 1/2") {
        const double tau0 = 11e-3;
        std::vector<double> x, y;
        for (int i = 0; i < 50; ++i) {
            const double t = i * 2e-3;
            x.push_back(t);
            y.push_back(0.8 * std::exp(-std::sqrt(t / tau0)) * (1.0 + 0.02 * rng.normal()));
        }
        const auto fit = calibration::fit_stretched_exponential(x, y, 0.5);
        CHECK(fit.timescale == doctest::Approx(tau0).epsilon(0.05));
        CHECK(fit.amplitude == doctest::Approx(0.8).epsilon(0.05));
    }

    SUBCASE("constant series flags degeneracy") {
        std::vector<double> x{0.0, 1.0, 2.0, 3.0};
        std::vector<double> y{2.0, 2.0, 2.0, 2.0};
        const auto fit = calibration::fit_exponential(x, y);
        CHECK(fit.degenerate);
        CHECK(std::isinf(fit.timescale));
    }
}

namespace {
stochastic::ShotSet synthetic_shots(double t0, double c, double amp0, double jitter,
                                    std::size_t n, Rng& rng) {
    stochastic::ShotSet set;
    for (std::size_t i = 0; i < n; ++i) {
        dynamics::BurstRecord rec;
        rec.max_amp = amp0 * (1.0 + jitter * rng.normal());
        rec.t_d = t0 + c / rec.max_amp;
        rec.phase = 0.0;
        rec.i_d = rec.max_amp;
        rec.q_d = 0.0;
        set.records.push_back(rec);
    }
    return set;
}
} // namespace

TEST_CASE("delay-time rescaling") {
    Rng rng(55);
    const double t0 = 0.4e-6, c = 3.0e-1, amp0 = 4e5;

    SUBCASE("records on the fitted curve collapse to a single value") {
        auto set = synthetic_shots(t0, c, amp0, 0.10, 60, rng);
        const auto rescaled = calibration::rescale_delay_times(set, amp0);
        for (const auto& r : rescaled.records)
            CHECK(r.t_d == doctest::Approx(t0 + c / amp0).epsilon(1e-9));
    }

    SUBCASE("a record at the reference amplitude is unchanged") {
        auto set = synthetic_shots(t0, c, amp0, 0.10, 60, rng);
        set.records[0].max_amp = amp0;
        set.records[0].t_d = 0.77e-6;  // off the curve on purpose
        const auto rescaled = calibration::rescale_delay_times(set, amp0);
        CHECK(rescaled.records[0].t_d == doctest::Approx(0.77e-6).epsilon(1e-9));
    }

    SUBCASE("amplitude jitter noise shrinks by at least 5x") {
        // on-curve delays plus small intrinsic scatter
        auto set = synthetic_shots(t0, c, amp0, 0.10, 400, rng);
        for (auto& r : set.records)
            r.t_d += 2e-9 * rng.normal();
        auto spread = [](const stochastic::ShotSet& s) {
            double mean = 0.0;
            for (const auto& r : s.records)
                mean += r.t_d;
            mean /= static_cast<double>(s.records.size());
            double var = 0.0;
            for (const auto& r : s.records)
                var += (r.t_d - mean) * (r.t_d - mean);
            return std::sqrt(var / static_cast<double>(s.records.size()));
        };
        calibration::RescaleDiagnostics diag;
        const auto rescaled = calibration::rescale_delay_times(set, amp0, 2.5, &diag);
        CHECK(spread(set) > 5.0 * spread(rescaled));
        CHECK(diag.hyperbola_c == doctest::Approx(c).epsilon(0.05));
    }

    SUBCASE("band outliers are excluded and reported") {
        auto set = synthetic_shots(t0, c, amp0, 0.05, 80, rng);
        set.records[3].max_amp = 3.0 * amp0;
        set.records[9].max_amp = 0.2 * amp0;
        calibration::RescaleDiagnostics diag;
        const auto rescaled = calibration::rescale_delay_times(set, amp0, 2.5, &diag);
        // the planted extremes are excluded; a 2.5 MAD band also trims a
        // few genuine gaussian tail events
        CHECK(std::count(diag.excluded.begin(), diag.excluded.end(), 3u) == 1);
        CHECK(std::count(diag.excluded.begin(), diag.excluded.end(), 9u) == 1);
        CHECK(diag.excluded.size() < 14);
        CHECK(rescaled.records.size() + diag.excluded.size() == 80);
    }
}

TEST_CASE("phase drift correction") {
    Rng rng(66);

    SUBCASE("zero slope is untouched") {
        stochastic::ShotSet set;
        for (int i = 0; i < 30; ++i) {
            dynamics::BurstRecord rec;
            rec.t_d = 1e-6 + i * 1e-8;
            rec.phase = 0.4;
            set.records.push_back(rec);
        }
        const auto out = calibration::correct_phase_drift(set);
        // the constant offset is absorbed into the fit intercept
        for (const auto& r : out.records)
            CHECK(std::abs(r.phase) < 1e-9);
    }

    SUBCASE("linear drift is removed") {
        const double slope = 0.3 / 1e-6;  // 0.3 rad per us
        stochastic::ShotSet set;
        for (int i = 0; i < 200; ++i) {
            dynamics::BurstRecord rec;
            rec.t_d = 0.8e-6 + 2.4e-6 * rng.uniform();
            rec.phase = math::wrap_angle(slope * rec.t_d + 0.2 + 0.05 * rng.normal());
            set.records.push_back(rec);
        }
        calibration::PhaseDriftDiagnostics diag;
        const auto out = calibration::correct_phase_drift(set, &diag);
        CHECK(diag.slope == doctest::Approx(slope).epsilon(0.05));
        std::vector<double> td, phase;
        for (const auto& r : out.records) {
            td.push_back(r.t_d);
            phase.push_back(r.phase);
        }
        const auto residual_line = fit::fit_line(td, phase);
        CHECK(std::abs(residual_line.slope) < 0.01 / 1e-6);
    }

    SUBCASE("wrapping near the boundary preserves circular distances") {
        stochastic::ShotSet set;
        const double slope = 4.0 / 1e-6;  // drives phases across the +-pi seam
        for (int i = 0; i < 120; ++i) {
            dynamics::BurstRecord rec;
            rec.t_d = 1e-6 + i * 1e-8;
            rec.phase = math::wrap_angle(slope * rec.t_d + 3.0);
            set.records.push_back(rec);
        }
        const auto out = calibration::correct_phase_drift(set);
        for (const auto& r : out.records) {
            CHECK(r.phase <= pi);
            CHECK(r.phase > -pi);
            CHECK(std::abs(r.phase) < 1e-6);
        }
    }
}

TEST_CASE("dB arithmetic is exactly multiplicative in power") {
    const double a = -13.7, b = -21.5, c = -1.5;
    CHECK(db_to_power(a + b + c) ==
          doctest::Approx(db_to_power(a) * db_to_power(b) * db_to_power(c)).epsilon(1e-12));
    CHECK(power_to_db(db_to_power(a)) == doctest::Approx(a).epsilon(1e-12));
}
