// module.cpp — pybind11 bindings for the main operations
//
// Mirrors the C++ surface closely; frequencies are angular (rad/s) as in
// the library, with hz_to_rad/rad_to_hz exposed for convenience.

#include <algorithm>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srsim/calibration.hpp"
#include "srsim/config.hpp"
#include "srsim/dynamics.hpp"
#include "srsim/ensemble.hpp"
#include "srsim/inversion.hpp"
#include "srsim/pulses.hpp"
#include "srsim/scenario.hpp"
#include "srsim/stochastic.hpp"
#include "srsim/units.hpp"

namespace py = pybind11;
using namespace srsim;

namespace {

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
    const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(v.size())};
    const std::vector<py::ssize_t> strides{static_cast<py::ssize_t>(sizeof(T))};
    return py::array_t<T>(shape, strides, v.data());
}

} // namespace

PYBIND11_MODULE(_srsim, m) {
    m.doc() = "semi-classical superradiance simulator core";

    m.attr("hbar") = hbar;
    m.attr("k_boltzmann") = k_boltzmann;
    m.def("hz_to_rad", &hz_to_rad);
    m.def("rad_to_hz", &rad_to_hz);
    m.def("db_to_power", &db_to_power);
    m.def("power_to_db", &power_to_db);

    // ---- ensemble ----
    py::class_<ensemble::QGaussianSpec>(m, "QGaussianSpec")
        .def(py::init([](double center, double fwhm, double q) {
                 ensemble::QGaussianSpec s{center, fwhm, q};
                 s.validate();
                 return s;
             }),
             py::arg("center_frequency"), py::arg("fwhm_gamma_q"), py::arg("shape_q"))
        .def_readonly("center_frequency", &ensemble::QGaussianSpec::center_frequency)
        .def_readonly("fwhm_gamma_q", &ensemble::QGaussianSpec::fwhm_gamma_q)
        .def_readonly("shape_q", &ensemble::QGaussianSpec::shape_q);

    py::class_<ensemble::BinnedEnsemble>(m, "BinnedEnsemble")
        .def_property_readonly("bin_frequencies",
                               [](const ensemble::BinnedEnsemble& b) {
                                   return to_array(b.bin_frequencies);
                               })
        .def_property_readonly("bin_weights",
                               [](const ensemble::BinnedEnsemble& b) {
                                   return to_array(b.bin_weights);
                               })
        .def_property_readonly("bin_counts",
                               [](const ensemble::BinnedEnsemble& b) {
                                   return to_array(b.bin_counts);
                               })
        .def_readonly("total_spins", &ensemble::BinnedEnsemble::total_spins)
        .def_readonly("single_spin_coupling", &ensemble::BinnedEnsemble::single_spin_coupling)
        .def("weight_sum", &ensemble::BinnedEnsemble::weight_sum)
        .def("__len__", &ensemble::BinnedEnsemble::size);

    py::class_<ensemble::SystemParams>(m, "SystemParams")
        .def(py::init([](double wc, double kappa, double gcoll, double gamma,
                         const ensemble::QGaussianSpec& dist, double n) {
                 ensemble::SystemParams p{wc, kappa, gcoll, gamma, dist, n};
                 p.validate();
                 return p;
             }),
             py::arg("cavity_frequency"), py::arg("cavity_halfwidth"),
             py::arg("collective_coupling"), py::arg("spin_halfwidth"),
             py::arg("distribution"), py::arg("total_spins"))
        .def_readonly("cavity_frequency", &ensemble::SystemParams::cavity_frequency)
        .def_readonly("cavity_halfwidth", &ensemble::SystemParams::cavity_halfwidth)
        .def_readonly("collective_coupling", &ensemble::SystemParams::collective_coupling)
        .def_readonly("spin_halfwidth", &ensemble::SystemParams::spin_halfwidth)
        .def_readonly("distribution", &ensemble::SystemParams::distribution)
        .def_readonly("total_spins", &ensemble::SystemParams::total_spins)
        .def("single_spin_coupling", &ensemble::SystemParams::single_spin_coupling);

    m.def("q_gaussian_density", &ensemble::q_gaussian_density, py::arg("spec"),
          py::arg("omega"));
    m.def("discretize", &ensemble::discretize, py::arg("spec"), py::arg("params"),
          py::arg("n_bins"), py::arg("span"));
    m.def("effective_linewidth",
          py::overload_cast<const ensemble::QGaussianSpec&, double, double>(
              &ensemble::effective_linewidth),
          py::arg("spec"), py::arg("gamma_perp"), py::arg("omega0"));
    m.def("effective_linewidth_binned",
          py::overload_cast<const ensemble::BinnedEnsemble&, double, double>(
              &ensemble::effective_linewidth),
          py::arg("bins"), py::arg("gamma_perp"), py::arg("omega0"));
    m.def("cooperativity", &ensemble::cooperativity, py::arg("params"), py::arg("gamma_eff"));
    m.def("coupling_from_field", &ensemble::coupling_from_field, py::arg("b0_tesla"),
          py::arg("gamma_nv"));
    m.def("spin_count_estimate", &ensemble::spin_count_estimate, py::arg("g_coll"),
          py::arg("g0"));

    // ---- dynamics ----
    py::class_<dynamics::SpinEnsembleState>(m, "SpinEnsembleState")
        .def_static("ground", &dynamics::SpinEnsembleState::ground, py::arg("n_bins"))
        .def_static("tipped", &dynamics::SpinEnsembleState::tipped, py::arg("n_bins"),
                    py::arg("p"), py::arg("theta"), py::arg("phi"))
        .def_property_readonly("coherences",
                               [](const dynamics::SpinEnsembleState& s) {
                                   return to_array(s.coherences);
                               })
        .def_property_readonly("inversions", [](const dynamics::SpinEnsembleState& s) {
            return to_array(s.inversions);
        });

    py::class_<dynamics::DetuningSchedule>(m, "DetuningSchedule")
        .def_static("constant", &dynamics::DetuningSchedule::constant, py::arg("delta"),
                    py::arg("t0"), py::arg("t1"))
        .def_static("hold_then_resonance", &dynamics::DetuningSchedule::hold_then_resonance,
                    py::arg("delta_hold"), py::arg("t_switch"), py::arg("edge"),
                    py::arg("t_end"))
        .def("at", &dynamics::DetuningSchedule::at, py::arg("t"));

    py::class_<dynamics::Trajectory>(m, "Trajectory")
        .def_property_readonly("times",
                               [](const dynamics::Trajectory& t) { return to_array(t.times); })
        .def_property_readonly("cavity_amplitude",
                               [](const dynamics::Trajectory& t) {
                                   return to_array(t.cavity_amplitude);
                               })
        .def_property_readonly("inversion",
                               [](const dynamics::Trajectory& t) {
                                   return to_array(t.inversion);
                               })
        .def_property_readonly("transverse_magnitude",
                               [](const dynamics::Trajectory& t) {
                                   return to_array(t.transverse_magnitude);
                               })
        .def_readonly("frame_frequency", &dynamics::Trajectory::frame_frequency)
        .def("__len__", &dynamics::Trajectory::size);

    py::class_<dynamics::BurstRecord>(m, "BurstRecord")
        .def_readonly("t_d", &dynamics::BurstRecord::t_d)
        .def_readonly("i_d", &dynamics::BurstRecord::i_d)
        .def_readonly("q_d", &dynamics::BurstRecord::q_d)
        .def_readonly("max_amp", &dynamics::BurstRecord::max_amp)
        .def_readonly("phase", &dynamics::BurstRecord::phase);

    py::class_<dynamics::IntegratorOptions>(m, "IntegratorOptions")
        .def(py::init<>())
        .def_readwrite("rel_tol", &dynamics::IntegratorOptions::rel_tol)
        .def_readwrite("abs_tol", &dynamics::IntegratorOptions::abs_tol)
        .def_readwrite("max_step", &dynamics::IntegratorOptions::max_step);

    m.def("integrate", &dynamics::integrate, py::arg("params"), py::arg("bins"),
          py::arg("initial"), py::arg("initial_cavity"), py::arg("drive"),
          py::arg("schedule"), py::arg("t_start"), py::arg("t_end"), py::arg("output_dt"),
          py::arg("options") = dynamics::IntegratorOptions{},
          py::call_guard<py::gil_scoped_release>());
    m.def("steady_state_transmission", &dynamics::steady_state_transmission,
          py::arg("params"), py::arg("bins"), py::arg("omega_p"), py::arg("p"),
          py::arg("drive_amp"), py::arg("delta") = 0.0);
    m.def("threshold_check", &dynamics::threshold_check, py::arg("p"),
          py::arg("cooperativity"));
    m.def("extract_burst", &dynamics::extract_burst, py::arg("trajectory"), py::arg("t_min"));

    // ---- pulses ----
    py::class_<pulses::DriveWaveform>(m, "DriveWaveform")
        .def(py::init([](double dt, std::vector<std::complex<double>> samples, double carrier) {
                 pulses::DriveWaveform w{dt, std::move(samples), carrier};
                 w.validate();
                 return w;
             }),
             py::arg("sample_period"), py::arg("samples"), py::arg("carrier_frequency"))
        .def_readonly("sample_period", &pulses::DriveWaveform::sample_period)
        .def_property_readonly("samples",
                               [](const pulses::DriveWaveform& w) {
                                   return to_array(w.samples);
                               })
        .def_readonly("carrier_frequency", &pulses::DriveWaveform::carrier_frequency)
        .def("duration", &pulses::DriveWaveform::duration)
        .def("energy", &pulses::DriveWaveform::energy)
        .def("at", &pulses::DriveWaveform::at, py::arg("t"));

    py::class_<pulses::ChirpSpec>(m, "ChirpSpec")
        .def(py::init([](double duration, double fwhm, double span, double center,
                         double peak) {
                 pulses::ChirpSpec s{duration, fwhm, span, center, peak};
                 s.validate();
                 return s;
             }),
             py::arg("duration"), py::arg("envelope_fwhm"), py::arg("sweep_span"),
             py::arg("center") = 0.0, py::arg("peak_target_amplitude") = 1.0)
        .def_readonly("duration", &pulses::ChirpSpec::duration)
        .def_readonly("envelope_fwhm", &pulses::ChirpSpec::envelope_fwhm)
        .def_readonly("sweep_span", &pulses::ChirpSpec::sweep_span)
        .def_readonly("center", &pulses::ChirpSpec::center)
        .def_readonly("peak_target_amplitude", &pulses::ChirpSpec::peak_target_amplitude);

    m.def("chirp_target", &pulses::chirp_target, py::arg("spec"), py::arg("dt"));
    m.def("compensate_drive", &pulses::compensate_drive, py::arg("a_target"),
          py::arg("params"), py::arg("delta_c"), py::arg("dt"), py::arg("carrier_frequency"));
    m.def("rectangular_pulse", &pulses::rectangular_pulse, py::arg("duration"),
          py::arg("amplitude"), py::arg("phase"), py::arg("dt"),
          py::arg("carrier_frequency"));
    m.def("pulse_train", &pulses::pulse_train, py::arg("pulse"), py::arg("period"),
          py::arg("count"));
    m.def("inversion_efficiency", &pulses::inversion_efficiency, py::arg("trajectory"),
          py::arg("pulse_end") = 0.0);

    // ---- stochastic ----
    py::class_<stochastic::TippingDistribution>(m, "TippingDistribution")
        .def(py::init([](double width, double eta, double direction) {
                 stochastic::TippingDistribution d{width, eta, direction};
                 d.validate();
                 return d;
             }),
             py::arg("width_theta") = 5.85e-4, py::arg("displacement_eta") = 0.0,
             py::arg("displacement_direction") = 0.0)
        .def_readonly("width_theta", &stochastic::TippingDistribution::width_theta)
        .def_readonly("displacement_eta", &stochastic::TippingDistribution::displacement_eta);

    py::class_<stochastic::ShotSet>(m, "ShotSet")
        .def_property_readonly("records",
                               [](const stochastic::ShotSet& s) { return s.records; })
        .def_readonly("trigger_photons", &stochastic::ShotSet::trigger_photons)
        .def_readonly("displacement_eta", &stochastic::ShotSet::displacement_eta)
        .def_property_readonly("thetas",
                               [](const stochastic::ShotSet& s) { return to_array(s.thetas); })
        .def_property_readonly("phis",
                               [](const stochastic::ShotSet& s) { return to_array(s.phis); })
        .def("__len__", [](const stochastic::ShotSet& s) { return s.records.size(); });

    m.def("rician_pdf", &stochastic::rician_pdf, py::arg("theta"), py::arg("dist"));
    m.def("rician_cdf", &stochastic::rician_cdf, py::arg("theta"), py::arg("dist"));
    m.def("angular_pdf", &stochastic::angular_pdf, py::arg("phi"), py::arg("eta"));
    m.def("delay_from_theta", &stochastic::delay_from_theta, py::arg("theta"), py::arg("t_r"));
    m.def("theta_from_delay", &stochastic::theta_from_delay, py::arg("t_d"), py::arg("t_r"));
    m.def("delay_pdf", &stochastic::delay_pdf, py::arg("t_d"), py::arg("dist"),
          py::arg("t_r"));
    m.def("delay_cdf", &stochastic::delay_cdf, py::arg("t_d"), py::arg("dist"),
          py::arg("t_r"));
    m.def("displacement_from_photons", &stochastic::displacement_from_photons,
          py::arg("n_trig"), py::arg("kappa_cal"));
    m.def("phase_coherence",
          py::overload_cast<const std::vector<double>&>(&stochastic::phase_coherence),
          py::arg("phases"));

    py::class_<stochastic::MonteCarloConfig>(m, "MonteCarloConfig")
        .def(py::init<>())
        .def_readwrite("n_shots", &stochastic::MonteCarloConfig::n_shots)
        .def_readwrite("seed", &stochastic::MonteCarloConfig::seed)
        .def_readwrite("inversion", &stochastic::MonteCarloConfig::inversion)
        .def_readwrite("p_jitter", &stochastic::MonteCarloConfig::p_jitter)
        .def_readwrite("t_end", &stochastic::MonteCarloConfig::t_end)
        .def_readwrite("output_dt", &stochastic::MonteCarloConfig::output_dt)
        .def_readwrite("t_min", &stochastic::MonteCarloConfig::t_min)
        .def_readwrite("jobs", &stochastic::MonteCarloConfig::jobs);

    m.def("monte_carlo_bursts", &stochastic::monte_carlo_bursts, py::arg("params"),
          py::arg("bins"), py::arg("dist"), py::arg("config"),
          py::arg("trigger") = std::nullopt, py::call_guard<py::gil_scoped_release>());

    // ---- calibration ----
    py::class_<calibration::PortCouplings>(m, "PortCouplings")
        .def(py::init([](double k1, double k2, double ktot, double a1, double a2, double a3) {
                 calibration::PortCouplings c{k1, k2, ktot, a1, a2, a3};
                 c.validate();
                 return c;
             }),
             py::arg("kappa1"), py::arg("kappa2"), py::arg("kappa_tot"), py::arg("a1") = 1.0,
             py::arg("a2") = 1.0, py::arg("a3") = 1.0)
        .def_readonly("kappa1", &calibration::PortCouplings::kappa1)
        .def_readonly("kappa2", &calibration::PortCouplings::kappa2)
        .def_readonly("kappa_tot", &calibration::PortCouplings::kappa_tot);

    m.def("s_parameters_on_resonance",
          [](const calibration::PortCouplings& c) {
              const auto s = calibration::s_parameters_on_resonance(c);
              return py::make_tuple(s.s11, s.s31, s.s32);
          },
          py::arg("couplings"));
    m.def("pulse_photons", &calibration::pulse_photons, py::arg("power_in"),
          py::arg("omega_c"), py::arg("a_line"), py::arg("kappa_in"), py::arg("kappa_tot"),
          py::arg("dt"));
    m.def("cavity_charging", &calibration::cavity_charging, py::arg("eta_d"),
          py::arg("kappa_tot"), py::arg("t"));
    m.def("drive_from_power", &calibration::drive_from_power, py::arg("power_in"),
          py::arg("omega_c"), py::arg("kappa_in"));
    m.def("bose_occupancy", &calibration::bose_occupancy, py::arg("temperature"),
          py::arg("omega"));
    m.def(
        "thermal_ladder",
        [](const std::vector<std::pair<double, double>>& stages, double omega_c) {
            calibration::StageLadder ladder;
            for (const auto& [t, db] : stages)
                ladder.stages.push_back({t, db});
            const auto result = calibration::thermal_ladder(ladder, omega_c);
            return py::make_tuple(result.occupancy, result.base);
        },
        py::arg("stages"), py::arg("omega_c"),
        "stages: list of (temperature K, attenuation dB to next stage)");
    m.def(
        "dispersive_shift",
        [](double g, double delta, double p) {
            bool regime = false;
            const double chi = calibration::dispersive_shift(g, delta, p, &regime);
            return py::make_tuple(chi, regime);
        },
        py::arg("g_coll"), py::arg("delta"), py::arg("p"));
    m.def(
        "fit_exponential",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const auto f = calibration::fit_exponential(x, y);
            return py::make_tuple(f.amplitude, f.timescale, f.degenerate);
        },
        py::arg("x"), py::arg("y"));
    m.def(
        "fit_stretched_exponential",
        [](const std::vector<double>& x, const std::vector<double>& y, double exponent) {
            const auto f = calibration::fit_stretched_exponential(x, y, exponent);
            return py::make_tuple(f.amplitude, f.timescale, f.degenerate);
        },
        py::arg("x"), py::arg("y"), py::arg("exponent") = 0.5);

    // ---- scenarios ----
    m.def(
        "run_scenario",
        [](const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
           int jobs) {
            scenario::RunOptions options;
            options.out_dir = out_dir;
            options.seed = seed;
            options.jobs = jobs;
            const auto result = scenario::run_scenario_file(config_path, options);
            return result.artifacts;
        },
        py::arg("config_path"), py::arg("out_dir"), py::arg("seed") = 0, py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());
    m.def("validate_config", [](const std::string& config_path) {
        return scenario::validate_config_file(config_path).to_text();
    });
}
