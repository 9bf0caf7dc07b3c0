#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "srsim/dynamics.hpp"
#include "srsim/errors.hpp"
#include "srsim/fit.hpp"
#include "srsim/math.hpp"
#include "srsim/rng.hpp"
#include "srsim/units.hpp"
#include "support.hpp"

using namespace srsim;
using dynamics::DetuningSchedule;
using dynamics::SpinEnsembleState;

namespace {

ensemble::BinnedEnsemble measured_bins(int n = 151, double span = 4.0) {
    const auto params = test::measured_params();
    return ensemble::discretize(params.distribution, params, n, span);
}

double weighted_inversion(const ensemble::BinnedEnsemble& bins,
                          const SpinEnsembleState& state) {
    double s = 0.0;
    for (std::size_t j = 0; j < bins.size(); ++j)
        s += bins.bin_counts[j] * state.inversions[j];
    return s / bins.count_sum();
}

} // namespace

TEST_CASE("derivatives: dark state is a fixed point") {
    const auto params = test::measured_params();
    const auto bins = measured_bins(11);
    auto state = dynamics::pack_state({0.0, 0.0}, SpinEnsembleState::ground(bins.size()));
    // remove the decay channels so the ground state is exactly stationary
    std::vector<double> dstate(state.size());
    dynamics::derivatives(params, bins, state, {0.0, 0.0}, 0.0, params.cavity_frequency,
                          dstate);
    for (double d : dstate)
        CHECK(d == 0.0);
}

TEST_CASE("derivatives: ground-state linear response sign") {
    // single resonant bin: s-' = -gamma s- - i g0 a for sz = -1, real a
    auto params = test::measured_params();
    ensemble::BinnedEnsemble bins;
    const double dw = 1.0;
    bins.bin_frequencies = {params.cavity_frequency - dw, params.cavity_frequency,
                            params.cavity_frequency + dw};
    bins.bin_weights = {0.0, 1.0, 0.0};
    bins.bin_counts = {0.0, 1.0, 0.0};
    bins.total_spins = 1.0;
    bins.single_spin_coupling = 12.84;

    SpinEnsembleState state = SpinEnsembleState::ground(3);
    state.coherences[1] = {3e-4, -2e-4};
    const double a = 1e-3;
    auto y = dynamics::pack_state({a, 0.0}, state);
    std::vector<double> dy(y.size());
    dynamics::derivatives(params, bins, y, {0.0, 0.0}, 0.0, params.cavity_frequency, dy);

    const std::complex<double> ds{dy[2 + 2], dy[3 + 2]};
    const std::complex<double> expected =
        -params.spin_halfwidth * state.coherences[1] -
        std::complex<double>(0.0, bins.single_spin_coupling * a);
    CHECK(ds.real() == doctest::Approx(expected.real()).epsilon(1e-12));
    CHECK(ds.imag() == doctest::Approx(expected.imag()).epsilon(1e-12));
}

TEST_CASE("derivatives: lossless energy bookkeeping") {
    // d/dt (|a|^2 + 1/2 sum n_j sz_j) = 0 when kappa = gamma = eta = 0
    auto params = test::measured_params();
    params.cavity_halfwidth = 0.0;
    params.spin_halfwidth = 0.0;
    const auto bins = measured_bins(31);

    Rng rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        SpinEnsembleState state = SpinEnsembleState::ground(bins.size());
        for (std::size_t j = 0; j < bins.size(); ++j) {
            const double sz = 2.0 * rng.uniform() - 1.0;
            const double smax = 0.5 * std::sqrt(1.0 - sz * sz);
            state.inversions[j] = sz;
            state.coherences[j] = std::polar(smax * rng.uniform(), two_pi * rng.uniform());
        }
        const std::complex<double> a{rng.normal(), rng.normal()};
        auto y = dynamics::pack_state(a, state);
        std::vector<double> dy(y.size());
        dynamics::derivatives(params, bins, y, {0.0, 0.0}, 0.0, params.cavity_frequency, dy);

        // 2 Re(conj(a) a') + 1/2 sum n_j sz_j'
        double de = 2.0 * (y[0] * dy[0] + y[1] * dy[1]);
        for (std::size_t j = 0; j < bins.size(); ++j)
            de += 0.5 * bins.bin_counts[j] * dy[2 + 2 * bins.size() + j];
        const double scale = std::abs(y[0] * dy[0]) + bins.count_sum();
        CHECK(std::abs(de) < 1e-9 * scale);
    }
}

TEST_CASE("integrate: empty-cavity decay with far-detuned spins") {
    const auto params = test::measured_params();
    const auto bins = measured_bins(51);
    const double kappa = params.cavity_halfwidth;
    const double delta = hz_to_rad(500e6);  // >> g_coll
    const double t_end = 1e-6;

    const auto traj = dynamics::integrate(
        params, bins, SpinEnsembleState::ground(bins.size()), {1.0, 0.0}, {},
        DetuningSchedule::constant(delta, 0.0, t_end), 0.0, t_end, 10e-9);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double expected = std::exp(-kappa * traj.times[i]);
        CHECK(std::abs(traj.cavity_amplitude[i]) ==
              doctest::Approx(expected).epsilon(1e-3));
    }
}

TEST_CASE("integrate: superradiant burst from an inverted ensemble") {
    const auto params = test::measured_params();
    const auto bins = measured_bins(151);
    const double p = 0.34;
    const double t_end = 2.0e-6;
    const auto traj = dynamics::integrate(
        params, bins, SpinEnsembleState::tipped(bins.size(), p, 1e-3, 0.0), {0.0, 0.0}, {},
        DetuningSchedule::constant(0.0, 0.0, t_end), 0.0, t_end, 1e-9);

    const auto burst = dynamics::extract_burst(traj, 0.0);
    REQUIRE(burst.has_value());
    // peak photon number is an order-unity fraction of the stored quanta
    const double stored = 0.5 * p * bins.count_sum();
    const double peak_photons = burst->max_amp * burst->max_amp;
    CHECK(peak_photons > 0.05 * stored);
    CHECK(peak_photons < stored);
    // rises, peaks, rings: a revival after the main peak
    std::size_t peak_index = 0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        if (std::abs(traj.cavity_amplitude[i]) > std::abs(traj.cavity_amplitude[peak_index]))
            peak_index = i;
    CHECK(peak_index > 0);
    CHECK(peak_index + 1 < traj.size());
    bool dipped = false, revived = false;
    double low = burst->max_amp;
    for (std::size_t i = peak_index; i < traj.size(); ++i) {
        const double amp = std::abs(traj.cavity_amplitude[i]);
        if (!dipped && amp < 0.2 * burst->max_amp) {
            dipped = true;
            low = amp;
        } else if (dipped) {
            low = std::min(low, amp);
            if (amp > 2.0 * low && amp > 0.05 * burst->max_amp)
                revived = true;
        }
    }
    CHECK(dipped);
    CHECK(revived);

    // emitted photons agree with the decaying-spin count at the order-one level
    const double p_end = traj.inversion.back();
    const double delta_sz = 0.5 * (p - p_end) * bins.count_sum();
    double dissipated = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i)
        dissipated += 2.0 * params.cavity_halfwidth *
                      std::norm(traj.cavity_amplitude[i]) *
                      (traj.times[i] - traj.times[i - 1]);
    CHECK(dissipated > 0.3 * delta_sz);
    CHECK(dissipated < 1.05 * delta_sz);
}

TEST_CASE("integrate: below threshold nothing grows") {
    const auto params = test::measured_params();
    const auto bins = measured_bins(101);
    const double gamma_eff = ensemble::effective_linewidth(
        params.distribution, params.spin_halfwidth, params.distribution.center_frequency);
    const double coop = ensemble::cooperativity(params, gamma_eff);
    const double p = 0.5 / coop;  // p C = 0.5
    const double theta = 1e-3;

    // start from the adiabatically slaved cavity field
    const auto state = SpinEnsembleState::tipped(bins.size(), p, theta, 0.0);
    std::complex<double> pol = 0.0;
    for (std::size_t j = 0; j < bins.size(); ++j)
        pol += bins.bin_counts[j] * state.coherences[j];
    const std::complex<double> a0 =
        std::complex<double>(0.0, -bins.single_spin_coupling) * pol /
        params.cavity_halfwidth;

    const double t_end = 10.0 / params.cavity_halfwidth;
    const auto traj =
        dynamics::integrate(params, bins, state, a0, {},
                            DetuningSchedule::constant(0.0, 0.0, t_end), 0.0, t_end, 2e-9);
    double max_amp = 0.0;
    for (const auto& a : traj.cavity_amplitude)
        max_amp = std::max(max_amp, std::abs(a));
    CHECK(max_amp < 10.0 * std::abs(a0));
    CHECK(std::abs(traj.cavity_amplitude.back()) < std::abs(a0));
}

TEST_CASE("threshold check is strict") {
    CHECK(dynamics::threshold_check(0.34, 12.2));
    CHECK_FALSE(dynamics::threshold_check(0.0, 12.2));
    CHECK_FALSE(dynamics::threshold_check(1.0 / 12.2, 12.2));
}

TEST_CASE("bloch norm conserved per bin when gamma = 0") {
    auto params = test::measured_params();
    params.spin_halfwidth = 1e-12;  // effectively zero
    const auto bins = measured_bins(51);
    const double t_end = 0.5e-6;
    const auto initial = SpinEnsembleState::tipped(bins.size(), 0.34, 1e-2, 0.3);
    const auto traj =
        dynamics::integrate(params, bins, initial, {0.0, 0.0}, {},
                            DetuningSchedule::constant(0.0, 0.0, t_end), 0.0, t_end, 5e-9);
    // recompute the final state through a second integration exposing state
    // via a 1-sample trajectory is not available; instead check the
    // conserved quantity through energy flow: norm checks need the state,
    // so integrate manually with the ODE layer
    auto y = dynamics::pack_state({0.0, 0.0}, initial);
    ode::Options opts;
    opts.rel_tol = 1e-9;
    opts.abs_tol = 1e-12;
    ode::integrate_adaptive(
        [&](double t, std::span<const double> yy, std::span<double> dy) {
            dynamics::derivatives(params, bins, yy, {0.0, 0.0},
                                  DetuningSchedule::constant(0.0, 0.0, t_end).at(t),
                                  params.cavity_frequency, dy);
        },
        y, 0.0, t_end, opts);
    std::complex<double> cavity;
    dynamics::SpinEnsembleState final_state;
    dynamics::unpack_state(y, cavity, final_state);
    const double n0 = initial.bloch_norm_sq(0);
    for (std::size_t j = 0; j < bins.size(); ++j)
        CHECK(final_state.bloch_norm_sq(j) == doctest::Approx(n0).epsilon(1e-6));
    (void)traj;
}

TEST_CASE("energy conserved when kappa = gamma = 0") {
    auto params = test::measured_params();
    params.cavity_halfwidth = 1e-12;
    params.spin_halfwidth = 1e-12;
    const auto bins = measured_bins(31);
    const auto initial = SpinEnsembleState::tipped(bins.size(), 0.3, 1e-2, 0.0);

    auto y = dynamics::pack_state({2.0, 1.0}, initial);
    const double e0 = [&] {
        double e = std::norm(std::complex<double>(y[0], y[1]));
        for (std::size_t j = 0; j < bins.size(); ++j)
            e += 0.5 * bins.bin_counts[j] * initial.inversions[j];
        return e;
    }();
    ode::Options opts;
    opts.rel_tol = 1e-10;
    opts.abs_tol = 1e-12;
    const double t_end = 0.3e-6;
    ode::integrate_adaptive(
        [&](double, std::span<const double> yy, std::span<double> dy) {
            dynamics::derivatives(params, bins, yy, {0.0, 0.0}, 0.0,
                                  params.cavity_frequency, dy);
        },
        y, 0.0, t_end, opts);
    std::complex<double> cavity;
    dynamics::SpinEnsembleState fin;
    dynamics::unpack_state(y, cavity, fin);
    double e1 = std::norm(cavity);
    for (std::size_t j = 0; j < bins.size(); ++j)
        e1 += 0.5 * bins.bin_counts[j] * fin.inversions[j];
    CHECK(e1 == doctest::Approx(e0).epsilon(1e-6));
}

TEST_CASE("step halving leaves the burst maximum unchanged") {
    const auto params = test::measured_params();
    const auto bins = measured_bins(101);
    const double t_end = 1.6e-6;
    const auto initial = SpinEnsembleState::tipped(bins.size(), 0.34, 1e-3, 0.0);

    auto peak_with = [&](double max_step) {
        dynamics::IntegratorOptions opts;
        opts.max_step = max_step;
        const auto traj =
            dynamics::integrate(params, bins, initial, {0.0, 0.0}, {},
                                DetuningSchedule::constant(0.0, 0.0, t_end), 0.0, t_end,
                                1e-9, opts);
        return dynamics::extract_burst(traj, 0.0)->max_amp;
    };
    const double coarse = peak_with(1e-9);
    const double fine = peak_with(0.5e-9);
    CHECK(std::abs(fine - coarse) / coarse < 1e-4);
}

TEST_CASE("small-signal linearity in the drive") {
    const auto params = test::measured_params();
    const auto bins = measured_bins(31);
    const double t_end = 0.5e-6;
    // amplitude large enough that rel_tol (not abs_tol) governs the error
    const auto pulse =
        pulses::rectangular_pulse(t_end, 5e7, 0.0, 1e-9, params.cavity_frequency);
    auto pulse2 = pulse;
    for (auto& s : pulse2.samples)
        s *= 2.0;

    dynamics::IntegratorOptions opts;
    opts.rel_tol = 1e-11;
    opts.abs_tol = 1e-14;
    const auto ground = SpinEnsembleState::ground(bins.size());
    const auto schedule = DetuningSchedule::constant(0.0, 0.0, t_end);
    const auto t1 = dynamics::integrate(params, bins, ground, {0.0, 0.0}, pulse, schedule,
                                        0.0, t_end, 5e-9, opts);
    const auto t2 = dynamics::integrate(params, bins, ground, {0.0, 0.0}, pulse2, schedule,
                                        0.0, t_end, 5e-9, opts);
    double peak = 0.0;
    for (const auto& a : t2.cavity_amplitude)
        peak = std::max(peak, std::abs(a));
    for (std::size_t i = 0; i < t1.size(); ++i)
        CHECK(std::abs(2.0 * t1.cavity_amplitude[i] - t2.cavity_amplitude[i]) <=
              1e-9 * peak);
}

TEST_CASE("burst delay scales linearly with log theta") {
    const auto params = test::measured_params();
    const auto bins = measured_bins(101);
    const double t_end = 2.2e-6;
    std::vector<double> log_theta, t_d;
    for (double theta : {1e-5, 1e-4, 1e-3, 1e-2}) {
        const auto traj = dynamics::integrate(
            params, bins, SpinEnsembleState::tipped(bins.size(), 0.34, theta, 0.0),
            {0.0, 0.0}, {}, DetuningSchedule::constant(0.0, 0.0, t_end), 0.0, t_end, 1e-9);
        const auto burst = dynamics::extract_burst(traj, 0.0);
        REQUIRE(burst.has_value());
        log_theta.push_back(std::log(theta / 2.0));
        t_d.push_back(burst->t_d);
    }
    const auto line = fit::fit_line(log_theta, t_d);
    CHECK(line.slope < 0.0);
    CHECK(line.r_squared > 0.99);
    // larger tipping -> earlier burst (monotonicity)
    for (std::size_t i = 1; i < t_d.size(); ++i)
        CHECK(t_d[i] < t_d[i - 1]);
}

TEST_CASE("steady-state transmission: split, lorentzian, dispersive") {
    const auto params = test::measured_params();
    const auto bins = measured_bins(1001);
    const double f_c = params.cavity_frequency;

    SUBCASE("ground state shows two polariton peaks straddling resonance") {
        const double span = 2.2 * params.collective_coupling;
        const int n = 4001;
        std::vector<double> amp(n);
        double best_lo = 0.0, best_hi = 0.0;
        int i_lo = 0, i_hi = 0;
        for (int i = 0; i < n; ++i) {
            const double w = f_c - span + 2.0 * span * i / (n - 1);
            amp[i] = std::abs(
                dynamics::steady_state_transmission(params, bins, w, -1.0, 1.0));
            if (w < f_c && amp[i] > best_lo) {
                best_lo = amp[i];
                i_lo = i;
            }
            if (w > f_c && amp[i] > best_hi) {
                best_hi = amp[i];
                i_hi = i;
            }
        }
        const double center = std::abs(
            dynamics::steady_state_transmission(params, bins, f_c, -1.0, 1.0));
        CHECK(best_lo > 1.3 * center);
        CHECK(best_hi > 1.3 * center);
        // with gamma_q ~ 2 g_coll the distribution wings push the peaks
        // outward; the converged separation is 1.133 x 2 g_coll (the
        // narrow-distribution limit recovers 2 g_coll)
        const double splitting = 2.0 * span * (i_hi - i_lo) / (n - 1);
        CHECK(splitting ==
              doctest::Approx(1.133 * 2.0 * params.collective_coupling).epsilon(0.01));

        auto narrow = params;
        narrow.distribution.fwhm_gamma_q = hz_to_rad(1.0e6);
        const auto nbins = ensemble::discretize(narrow.distribution, narrow, 1001, 4.0);
        double lo = 0.0, hi = 0.0;
        int j_lo = 0, j_hi = 0;
        for (int i = 0; i < n; ++i) {
            const double w = f_c - span + 2.0 * span * i / (n - 1);
            const double a = std::abs(
                dynamics::steady_state_transmission(narrow, nbins, w, -1.0, 1.0));
            if (w < f_c && a > lo) {
                lo = a;
                j_lo = i;
            }
            if (w > f_c && a > hi) {
                hi = a;
                j_hi = i;
            }
        }
        const double narrow_split = 2.0 * span * (j_hi - j_lo) / (n - 1);
        CHECK(narrow_split ==
              doctest::Approx(2.0 * params.collective_coupling).epsilon(0.02));
    }

    SUBCASE("scrambled spins give a bare lorentzian of HWHM kappa") {
        const double peak = std::norm(
            dynamics::steady_state_transmission(params, bins, f_c, 0.0, 1.0));
        const double half_up = math::bisect(
            [&](double d) {
                return std::norm(dynamics::steady_state_transmission(params, bins, f_c + d,
                                                                     0.0, 1.0)) -
                       0.5 * peak;
            },
            0.0, 10.0 * params.cavity_halfwidth);
        CHECK(half_up == doctest::Approx(params.cavity_halfwidth).epsilon(0.02));
    }

    SUBCASE("detuned ground-state ensemble pulls the cavity dispersively") {
        const double delta = hz_to_rad(26e6);
        // expand the sum to first order in 1/delta: pull = g^2 p / delta
        const double expected_pull =
            params.collective_coupling * params.collective_coupling * (-1.0) / delta;
        const int n = 4001;
        const double span = 5.0 * params.cavity_halfwidth;
        double best = 0.0, best_w = f_c;
        for (int i = 0; i < n; ++i) {
            const double w = f_c - span + 2.0 * span * i / (n - 1);
            const double a = std::norm(
                dynamics::steady_state_transmission(params, bins, w, -1.0, 1.0, delta));
            if (a > best) {
                best = a;
                best_w = w;
            }
        }
        CHECK(best_w - f_c == doctest::Approx(expected_pull).epsilon(0.05));
    }
}

TEST_CASE("extract_burst behaviour") {
    dynamics::Trajectory traj;
    const double dt = 1e-8;
    for (int i = 0; i <= 300; ++i) {
        const double t = i * dt;
        const double amp = std::exp(-std::pow((t - 1e-6) / 2e-7, 2));
        traj.times.push_back(t);
        traj.cavity_amplitude.emplace_back(amp, 0.0);
        traj.inversion.push_back(0.0);
        traj.transverse_magnitude.push_back(0.0);
    }
    SUBCASE("synthetic bump at 1 us") {
        const auto rec = dynamics::extract_burst(traj, 0.0);
        REQUIRE(rec.has_value());
        CHECK(std::abs(rec->t_d - 1e-6) <= 0.5 * dt);
        CHECK(rec->max_amp == doctest::Approx(std::hypot(rec->i_d, rec->q_d)).epsilon(1e-9));
    }
    SUBCASE("t_min excludes the early window") {
        const auto rec = dynamics::extract_burst(traj, 2.5e-6);
        REQUIRE(rec.has_value());
        CHECK(rec->t_d >= 2.5e-6);
    }
    SUBCASE("two equal maxima: earlier wins") {
        dynamics::Trajectory flat;
        for (int i = 0; i < 10; ++i) {
            flat.times.push_back(i * dt);
            flat.cavity_amplitude.emplace_back((i == 3 || i == 7) ? 1.0 : 0.1, 0.0);
            flat.inversion.push_back(0.0);
            flat.transverse_magnitude.push_back(0.0);
        }
        const auto rec = dynamics::extract_burst(flat, 0.0);
        REQUIRE(rec.has_value());
        CHECK(rec->t_d == doctest::Approx(3 * dt));
    }
    SUBCASE("all-zero trajectory reports no burst") {
        dynamics::Trajectory zero;
        for (int i = 0; i < 10; ++i) {
            zero.times.push_back(i * dt);
            zero.cavity_amplitude.emplace_back(0.0, 0.0);
            zero.inversion.push_back(0.0);
            zero.transverse_magnitude.push_back(0.0);
        }
        CHECK_FALSE(dynamics::extract_burst(zero, 0.0).has_value());
    }
}

TEST_CASE("detuning schedule evaluation and validation") {
    const auto s = DetuningSchedule::hold_then_resonance(hz_to_rad(26e6), 1e-6, 200e-9, 3e-6);
    CHECK(s.at(0.5e-6) == doctest::Approx(hz_to_rad(26e6)));
    CHECK(s.at(1.1e-6) == doctest::Approx(0.5 * hz_to_rad(26e6)).epsilon(1e-9));
    CHECK(s.at(2e-6) == 0.0);
    CHECK(s.covers(0.0, 3e-6));
    CHECK_FALSE(s.covers(0.0, 4e-6));

    DetuningSchedule gap;
    gap.segments.push_back({0.0, 1.0, 0.0, 0.0});
    gap.segments.push_back({2.0, 3.0, 0.0, 0.0});
    CHECK_THROWS_AS(gap.validate(), std::invalid_argument);
}

TEST_CASE("detuning hold stores inversion while erasing transverse coherence") {
    // hold the inverted ensemble detuned, ramp back over 200 ns, and let
    // the burst develop: the inversion survives the hold while the
    // initial tip dephases, so the burst comes later than without a hold
    const auto params = test::measured_params();
    const auto bins = measured_bins(101);
    const double theta = 1e-2;
    const double p = 0.34;
    const double hold = 1.0e-6;
    const double edge = 200e-9;
    const double t_end = hold + edge + 2.2e-6;

    const auto schedule =
        DetuningSchedule::hold_then_resonance(hz_to_rad(26e6), hold, edge, t_end);
    const auto traj = dynamics::integrate(
        params, bins, SpinEnsembleState::tipped(bins.size(), p, theta, 0.0), {0.0, 0.0},
        {}, schedule, 0.0, t_end, 1e-9);

    // no burst while detuned; the slaved field stays far below burst scale
    double max_hold = 0.0;
    std::size_t i_hold_end = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.times[i] > hold)
            break;
        max_hold = std::max(max_hold, std::abs(traj.cavity_amplitude[i]));
        i_hold_end = i;
    }
    const auto burst = dynamics::extract_burst(traj, hold + edge);
    REQUIRE(burst.has_value());
    CHECK(max_hold < 1e-2 * burst->max_amp);

    // the stored inversion is intact at the end of the hold while the
    // collective transverse component has dephased
    CHECK(traj.inversion[i_hold_end] == doctest::Approx(p * std::cos(theta)).epsilon(1e-3));
    CHECK(traj.transverse_magnitude[i_hold_end] <
          0.05 * (0.5 * p * theta));

    // reduced effective tipping delays the burst relative to the same
    // tip released immediately on resonance
    const auto direct = dynamics::integrate(
        params, bins, SpinEnsembleState::tipped(bins.size(), p, theta, 0.0), {0.0, 0.0},
        {}, DetuningSchedule::constant(0.0, 0.0, 2.2e-6), 0.0, 2.2e-6, 1e-9);
    const auto direct_burst = dynamics::extract_burst(direct, 0.0);
    REQUIRE(direct_burst.has_value());
    CHECK(burst->t_d - (hold + edge) > direct_burst->t_d);
    // the released burst still carries the stored energy
    CHECK(burst->max_amp > 0.8 * direct_burst->max_amp);
}

TEST_CASE("integrator reports stiffness with the failure time") {
    const auto params = test::measured_params();
    const auto bins = measured_bins(11);
    dynamics::IntegratorOptions opts;
    opts.max_steps = 10;  // starve the budget
    try {
        dynamics::integrate(params, bins, SpinEnsembleState::tipped(bins.size(), 0.3, 1e-3, 0.0),
                            {0.0, 0.0}, {}, DetuningSchedule::constant(0.0, 0.0, 1e-5), 0.0,
                            1e-5, 1e-7, opts);
        FAIL("expected StiffnessError");
    } catch (const StiffnessError& e) {
        CHECK(e.time_of_failure >= 0.0);
        CHECK(e.time_of_failure <= 1e-5);
    }
}

TEST_CASE("state validation catches bloch violations and length mismatch") {
    const auto bins = measured_bins(11);
    auto state = SpinEnsembleState::ground(bins.size());
    CHECK_NOTHROW(state.validate(bins));
    state.inversions[0] = 1.2;
    CHECK_THROWS_AS(state.validate(bins), std::invalid_argument);
    auto short_state = SpinEnsembleState::ground(bins.size() - 1);
    CHECK_THROWS_AS(short_state.validate(bins), std::invalid_argument);
}
