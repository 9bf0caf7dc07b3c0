#include "srsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "srsim/errors.hpp"
#include "srsim/inversion.hpp"
#include "srsim/math.hpp"
#include "srsim/units.hpp"

namespace srsim::scenario {

using json = nlohmann::json;

Kind kind_from_string(const std::string& name) {
    if (name == "self_decay") return Kind::self_decay;
    if (name == "triggered_sr") return Kind::triggered_sr;
    if (name == "pulse_train") return Kind::pulse_train;
    if (name == "transmission_sweep") return Kind::transmission_sweep;
    if (name == "inversion_scan") return Kind::inversion_scan;
    if (name == "calibration") return Kind::calibration;
    throw ConfigError("scenario.kind: unknown kind '" + name + "'");
}

std::string to_string(Kind kind) {
    switch (kind) {
        case Kind::self_decay: return "self_decay";
        case Kind::triggered_sr: return "triggered_sr";
        case Kind::pulse_train: return "pulse_train";
        case Kind::transmission_sweep: return "transmission_sweep";
        case Kind::inversion_scan: return "inversion_scan";
        case Kind::calibration: return "calibration";
    }
    return "?";
}

double hold_time_to_inversion(double hold, double p0, double tau0) {
    if (hold < 0.0 || !(tau0 > 0.0))
        throw std::invalid_argument("hold_time_to_inversion: bad hold time or tau0");
    return p0 * std::exp(-std::sqrt(hold / tau0));
}

bool ValidationReport::ok() const {
    for (const auto& issue : issues)
        if (issue.severity == Issue::Severity::error)
            return false;
    return true;
}

std::string ValidationReport::to_text() const {
    std::string out;
    for (const auto& issue : issues) {
        switch (issue.severity) {
            case Issue::Severity::error: out += "error: "; break;
            case Issue::Severity::warning: out += "warning: "; break;
            case Issue::Severity::info: out += "info: "; break;
        }
        out += issue.message + "\n";
    }
    if (issues.empty())
        out = "ok: no issues\n";
    return out;
}

namespace {

// ---- schema ---------------------------------------------------------

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"scenario", {"kind", "name"}},
        {"system",
         {"cavity_frequency_hz", "cavity_halfwidth_hz", "collective_coupling_hz",
          "spin_halfwidth_hz", "total_spins", "fwhm_hz", "shape_q"}},
        {"distribution", {"center_frequency_hz", "fwhm_hz", "shape_q"}},
        {"grid", {"n_bins", "span"}},
        {"integrator", {"rel_tol", "abs_tol", "max_step_ns"}},
        {"outputs", {"format", "binary"}},
        {"self_decay",
         {"inversions", "hold_times_ms", "tipping_theta", "t_end_us", "output_dt_ns",
          "t_min_us"}},
        {"hold_model", {"p0", "tau0_ms"}},
        {"montecarlo",
         {"n_shots", "seed", "etas", "trigger_photons", "kappa_cal", "inversion", "pc",
          "theta_bar", "p_jitter", "t_end_us", "output_dt_ns", "t_min_us"}},
        {"rescale", {"reference_amp", "band_mads"}},
        {"pulse_train",
         {"pc", "inversion", "pulse_photons", "drive_amplitude", "pulse_duration_ns",
          "period_us", "count", "dt_ns", "output_dt_ns", "tail_us", "tipping_theta"}},
        {"sweep", {"inversions", "span_hz", "points", "drive_amp", "delta_hz"}},
        {"inversion_pulse",
         {"duration_ns", "envelope_fwhm_ns", "sweep_span_gammaq", "center_offset_hz",
          "amplitudes", "dt_ns"}},
        {"ports", {"kappa1_hz", "kappa2_hz", "kappa_tot_hz", "a1_db", "a2_db", "a3_db"}},
        {"dispersive", {"delta_hz", "inversion"}},
    };
    return schema;
}

bool section_is_known(const std::string& name) {
    if (known_keys().count(name))
        return true;
    return name.rfind("ladder.", 0) == 0 || name.rfind("pulse_photons.", 0) == 0;
}

const std::set<std::string>& keys_for(const std::string& section) {
    static const std::set<std::string> ladder_keys = {"stages"};
    static const std::set<std::string> photon_keys = {
        "power_w", "attenuation_db", "cold_correction_db", "kappa_in_hz", "kappa_tot_hz",
        "duration_ns"};
    static const std::set<std::string> empty;
    if (section.rfind("ladder.", 0) == 0)
        return ladder_keys;
    if (section.rfind("pulse_photons.", 0) == 0)
        return photon_keys;
    auto it = known_keys().find(section);
    return it == known_keys().end() ? empty : it->second;
}

// ---- shared loading --------------------------------------------------

struct Setup {
    ensemble::SystemParams params;
    ensemble::BinnedEnsemble bins;
    double gamma_eff = 0.0;
    double cooperativity = 0.0;
    dynamics::IntegratorOptions integrator;
};

Setup load_setup(const config::ConfigFile& cfg) {
    Setup s;
    s.params = config::load_system_params(cfg);
    const int n_bins = static_cast<int>(cfg.get_integer_or("grid", "n_bins", 1500));
    const double span = cfg.get_number_or("grid", "span", 4.0);
    s.bins = ensemble::discretize(s.params.distribution, s.params, n_bins, span);
    s.gamma_eff = ensemble::effective_linewidth(s.params.distribution, s.params.spin_halfwidth,
                                                s.params.distribution.center_frequency);
    s.cooperativity = ensemble::cooperativity(s.params, s.gamma_eff);
    s.integrator.rel_tol = cfg.get_number_or("integrator", "rel_tol", 1e-8);
    s.integrator.abs_tol = cfg.get_number_or("integrator", "abs_tol", 1e-10);
    const double max_step_ns = cfg.get_number_or("integrator", "max_step_ns", 0.0);
    s.integrator.max_step = max_step_ns * 1e-9;
    return s;
}

// empty-cavity reference: same grid, no spins
ensemble::BinnedEnsemble without_spins(ensemble::BinnedEnsemble bins) {
    std::fill(bins.bin_counts.begin(), bins.bin_counts.end(), 0.0);
    std::fill(bins.bin_weights.begin(), bins.bin_weights.end(), 0.0);
    return bins;
}

// ---- output staging --------------------------------------------------

struct Stager {
    std::vector<std::pair<std::string, std::string>> files;  // name -> body

    void add(const std::string& name, std::string body) {
        files.emplace_back(name, std::move(body));
    }
    void add_table(const std::string& name, const csvio::Table& table) {
        add(name, csvio::to_csv(table));
    }

    RunResult commit(const std::filesystem::path& out_dir) {
        std::filesystem::create_directories(out_dir);
        csvio::Manifest manifest;
        std::vector<std::filesystem::path> written;
        try {
            for (const auto& [name, body] : files) {
                csvio::write_text(out_dir / name, body);
                written.push_back(out_dir / name);
                manifest.add(name, body);
            }
            csvio::write_text(out_dir / "manifest.csv", manifest.serialize());
        } catch (...) {
            for (const auto& p : written)
                std::filesystem::remove(p);
            throw;
        }
        RunResult result;
        result.out_dir = out_dir;
        for (const auto& [name, _] : files)
            result.artifacts.push_back(name);
        result.artifacts.push_back("manifest.csv");
        return result;
    }
};

double median(std::vector<double> v) {
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + m, v.end());
    double out = v[m];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + m - 1, v.end());
        out = 0.5 * (out + v[m - 1]);
    }
    return out;
}

// jackknife confidence interval of the pairwise phase coherence
std::pair<double, double> coherence_ci(const std::vector<double>& phases, double coherence) {
    const std::size_t n = phases.size();
    if (n < 3)
        return {coherence, coherence};
    double cr = 0.0, ci = 0.0;
    for (double p : phases) {
        cr += std::cos(p);
        ci += std::sin(p);
    }
    std::vector<double> loo(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double rr = cr - std::cos(phases[i]);
        const double ii = ci - std::sin(phases[i]);
        const double total = rr * rr + ii * ii;
        loo[i] = (total - static_cast<double>(n - 1)) /
                 (static_cast<double>(n - 1) * (n - 2));
        mean += loo[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : loo)
        var += (v - mean) * (v - mean);
    var *= static_cast<double>(n - 1) / static_cast<double>(n);
    const double half = 1.96 * std::sqrt(var);
    return {coherence - half, coherence + half};
}

// ---- scenario bodies -------------------------------------------------

void run_self_decay(const config::ConfigFile& cfg, const Setup& setup, Stager& stager) {
    const double theta = cfg.get_number_or("self_decay", "tipping_theta", 1e-3);
    const double t_end = cfg.get_number_or("self_decay", "t_end_us", 2.5) * 1e-6;
    const double out_dt = cfg.get_number_or("self_decay", "output_dt_ns", 1.0) * 1e-9;
    const double t_min = cfg.get_number_or("self_decay", "t_min_us", 0.0) * 1e-6;

    std::vector<double> inversions;
    std::vector<double> holds_ms;
    if (cfg.has_key("self_decay", "inversions")) {
        inversions = cfg.get_numbers("self_decay", "inversions");
        holds_ms.assign(inversions.size(), -1.0);
    } else if (cfg.has_key("self_decay", "hold_times_ms")) {
        holds_ms = cfg.get_numbers("self_decay", "hold_times_ms");
        const double p0 = cfg.get_number("hold_model", "p0");
        const double tau0 = cfg.get_number("hold_model", "tau0_ms");
        for (double h : holds_ms)
            inversions.push_back(hold_time_to_inversion(h, p0, tau0));
    } else {
        throw ConfigError("self_decay: need either self_decay.inversions or "
                          "self_decay.hold_times_ms");
    }

    const bool binary = cfg.get_bool_or("outputs", "binary", false);
    csvio::Table maxima;
    maxima.columns = {"index", "p", "hold_ms", "t_d", "max_amp"};
    const auto schedule = dynamics::DetuningSchedule::constant(0.0, 0.0, t_end);
    for (std::size_t i = 0; i < inversions.size(); ++i) {
        const auto initial =
            dynamics::SpinEnsembleState::tipped(setup.bins.size(), inversions[i], theta, 0.0);
        const auto traj = dynamics::integrate(setup.params, setup.bins, initial, {0.0, 0.0},
                                              {}, schedule, 0.0, t_end, out_dt,
                                              setup.integrator);
        const std::string name = "self_decay_traj_" + std::to_string(i);
        stager.add_table(name + ".csv", csvio::trajectory_table(traj));
        if (binary)
            stager.add(name + ".bin", csvio::trajectory_binary(traj));
        const auto burst = dynamics::extract_burst(traj, t_min);
        maxima.rows.push_back({static_cast<double>(i), inversions[i], holds_ms[i],
                               burst ? burst->t_d : -1.0, burst ? burst->max_amp : 0.0});
    }
    stager.add_table("self_decay_maxima.csv", maxima);
}

void run_triggered_sr(const config::ConfigFile& cfg, const Setup& setup, Stager& stager,
                      const RunOptions& options) {
    stochastic::MonteCarloConfig mc;
    mc.n_shots = static_cast<int>(cfg.get_integer_or("montecarlo", "n_shots", 200));
    mc.seed = options.seed ? options.seed
                           : static_cast<std::uint64_t>(cfg.get_integer_or("montecarlo", "seed", 1));
    if (cfg.has_key("montecarlo", "inversion"))
        mc.inversion = cfg.get_number("montecarlo", "inversion");
    else if (cfg.has_key("montecarlo", "pc"))
        mc.inversion = cfg.get_number("montecarlo", "pc") / setup.cooperativity;
    mc.p_jitter = cfg.get_number_or("montecarlo", "p_jitter", 0.0);
    mc.t_end = cfg.get_number_or("montecarlo", "t_end_us", 3.0) * 1e-6;
    mc.output_dt = cfg.get_number_or("montecarlo", "output_dt_ns", 1.0) * 1e-9;
    mc.t_min = cfg.get_number_or("montecarlo", "t_min_us", 0.0) * 1e-6;
    mc.jobs = options.jobs;
    mc.integrator = setup.integrator;

    std::vector<double> etas;
    std::vector<double> photons;
    const double kappa_cal = cfg.get_number_or("montecarlo", "kappa_cal", 0.0);
    if (cfg.has_key("montecarlo", "etas")) {
        etas = cfg.get_numbers("montecarlo", "etas");
        for (double eta : etas)
            photons.push_back(kappa_cal > 0.0 ? (eta / kappa_cal) * (eta / kappa_cal) : 0.0);
    } else if (cfg.has_key("montecarlo", "trigger_photons")) {
        if (!(kappa_cal > 0.0))
            throw ConfigError("montecarlo.kappa_cal required with trigger_photons");
        photons = cfg.get_numbers("montecarlo", "trigger_photons");
        for (double n : photons)
            etas.push_back(stochastic::displacement_from_photons(n, kappa_cal));
    } else {
        throw ConfigError("montecarlo: need etas or trigger_photons");
    }

    const double theta_bar = cfg.get_number_or("montecarlo", "theta_bar", 5.85e-4);
    const double band_mads = cfg.get_number_or("rescale", "band_mads", 2.5);

    std::vector<stochastic::ShotSet> sets;
    for (std::size_t k = 0; k < etas.size(); ++k) {
        stochastic::TippingDistribution dist;
        dist.width_theta = theta_bar;
        dist.displacement_eta = etas[k];
        auto set = stochastic::monte_carlo_bursts(setup.params, setup.bins, dist, mc);
        set.trigger_photons = photons[k];
        stager.add_table("shots_eta_" + std::to_string(k) + ".csv", csvio::shot_table(set));
        sets.push_back(std::move(set));
    }

    // rescale against the highest-power set, as the experiment does
    double reference_amp = cfg.get_number_or("rescale", "reference_amp", 0.0);
    if (!(reference_amp > 0.0)) {
        std::vector<double> amps;
        for (const auto& r : sets.back().records)
            amps.push_back(r.max_amp);
        reference_amp = median(std::move(amps));
    }
    json summary = json::array();
    for (std::size_t k = 0; k < sets.size(); ++k) {
        calibration::RescaleDiagnostics diag;
        auto rescaled = calibration::rescale_delay_times(sets[k], reference_amp, band_mads,
                                                         &diag);
        // phase correction needs a t_d spread; degenerate sets pass through
        double td_lo = rescaled.records.front().t_d, td_hi = td_lo;
        for (const auto& r : rescaled.records) {
            td_lo = std::min(td_lo, r.t_d);
            td_hi = std::max(td_hi, r.t_d);
        }
        auto corrected =
            (td_hi > td_lo) ? calibration::correct_phase_drift(rescaled) : rescaled;
        stager.add_table("shots_rescaled_eta_" + std::to_string(k) + ".csv",
                         csvio::shot_table(corrected));

        std::vector<double> tds, phases;
        for (const auto& r : corrected.records) {
            tds.push_back(r.t_d);
            phases.push_back(r.phase);
        }
        const double coherence = stochastic::phase_coherence(corrected);
        const auto ci = coherence_ci(phases, coherence);
        double var = 0.0, mean = 0.0;
        for (double t : tds)
            mean += t;
        mean /= static_cast<double>(tds.size());
        for (double t : tds)
            var += (t - mean) * (t - mean);
        var /= static_cast<double>(tds.size());
        summary.push_back({{"eta", etas[k]},
                           {"n_trig", photons[k]},
                           {"median_t_d", median(tds)},
                           {"var_t_d", var},
                           {"coherence", coherence},
                           {"ci_low", ci.first},
                           {"ci_high", ci.second},
                           {"excluded", diag.excluded.size()},
                           {"rescale_c", diag.hyperbola_c}});
    }
    // the json summary feeds plot-data; --format csv adds a flat table
    stager.add("summary.json", summary.dump(2) + "\n");
    if (options.format == "csv") {
        csvio::Table table;
        table.columns = {"eta",      "n_trig",  "median_t_d", "var_t_d",
                         "coherence", "ci_low",  "ci_high"};
        for (const auto& row : summary)
            table.rows.push_back({row["eta"], row["n_trig"], row["median_t_d"],
                                  row["var_t_d"], row["coherence"], row["ci_low"],
                                  row["ci_high"]});
        stager.add_table("summary.csv", table);
    }
}

void run_pulse_train(const config::ConfigFile& cfg, const Setup& setup, Stager& stager) {
    double p = cfg.get_number_or("pulse_train", "inversion", 0.0);
    if (p == 0.0) {
        const double pc = cfg.get_number("pulse_train", "pc");
        p = pc / setup.cooperativity;
    }
    const double duration = cfg.get_number_or("pulse_train", "pulse_duration_ns", 100.0) * 1e-9;
    const double period = cfg.get_number_or("pulse_train", "period_us", 5.0) * 1e-6;
    const int count = static_cast<int>(cfg.get_integer_or("pulse_train", "count", 10));
    const double dt = cfg.get_number_or("pulse_train", "dt_ns", 1.0) * 1e-9;
    const double out_dt = cfg.get_number_or("pulse_train", "output_dt_ns", 2.0) * 1e-9;
    const double tail = cfg.get_number_or("pulse_train", "tail_us", 2.0) * 1e-6;
    const double theta = cfg.get_number_or("pulse_train", "tipping_theta", 0.0);

    double amplitude = cfg.get_number_or("pulse_train", "drive_amplitude", 0.0);
    if (!(amplitude > 0.0)) {
        const double n_peak = cfg.get_number("pulse_train", "pulse_photons");
        const double kappa = setup.params.cavity_halfwidth;
        amplitude = kappa * std::sqrt(n_peak) / (1.0 - std::exp(-kappa * duration));
    }

    const auto pulse = pulses::rectangular_pulse(duration, amplitude, 0.0, dt,
                                                 setup.params.cavity_frequency);
    const auto train = pulses::pulse_train(pulse, period, count);
    const double t_end = train.duration() + tail;
    const auto schedule = dynamics::DetuningSchedule::constant(0.0, 0.0, t_end);

    const auto initial = theta > 0.0
                             ? dynamics::SpinEnsembleState::tipped(setup.bins.size(), p, theta, 0.0)
                             : dynamics::SpinEnsembleState::tipped(setup.bins.size(), p, 0.0, 0.0);
    const auto traj_spins = dynamics::integrate(setup.params, setup.bins, initial, {0.0, 0.0},
                                                train, schedule, 0.0, t_end, out_dt,
                                                setup.integrator);
    const auto empty_bins = without_spins(setup.bins);
    const auto empty_state = dynamics::SpinEnsembleState::ground(empty_bins.size());
    const auto traj_empty = dynamics::integrate(setup.params, empty_bins, empty_state,
                                                {0.0, 0.0}, train, schedule, 0.0, t_end,
                                                out_dt, setup.integrator);

    stager.add_table("pulse_train_spins.csv", csvio::trajectory_table(traj_spins));
    stager.add_table("pulse_train_empty.csv", csvio::trajectory_table(traj_empty));

    // per-pulse peaks and gains
    csvio::Table gains;
    gains.columns = {"pulse", "peak_spins", "peak_empty", "amplitude_gain", "photon_gain",
                     "delta_amp", "p_before"};
    for (int k = 0; k < count; ++k) {
        const double w0 = k * period;
        const double w1 = w0 + period;
        double peak_s = 0.0, peak_e = 0.0, p_before = p;
        for (std::size_t i = 0; i < traj_spins.size(); ++i) {
            const double t = traj_spins.times[i];
            if (t < w0 || t >= w1)
                continue;
            peak_s = std::max(peak_s, std::abs(traj_spins.cavity_amplitude[i]));
            peak_e = std::max(peak_e, std::abs(traj_empty.cavity_amplitude[i]));
        }
        for (std::size_t i = 0; i < traj_spins.size(); ++i) {
            if (traj_spins.times[i] >= w0) {
                p_before = traj_spins.inversion[i];
                break;
            }
        }
        const double gain = peak_e > 0.0 ? peak_s / peak_e : 0.0;
        gains.rows.push_back({static_cast<double>(k), peak_s, peak_e, gain, gain * gain,
                              peak_s - peak_e, p_before});
    }
    stager.add_table("pulse_gains.csv", gains);
}

void run_transmission_sweep(const config::ConfigFile& cfg, const Setup& setup,
                            Stager& stager) {
    const auto inversions = cfg.has_key("sweep", "inversions")
                                ? cfg.get_numbers("sweep", "inversions")
                                : std::vector<double>{-1.0, 0.0};
    const double span_hz = cfg.get_number_or(
        "sweep", "span_hz", 2.0 * rad_to_hz(setup.params.collective_coupling));
    const int points = static_cast<int>(cfg.get_integer_or("sweep", "points", 2001));
    const double drive_amp = cfg.get_number_or("sweep", "drive_amp", 1.0);
    const double delta = hz_to_rad(cfg.get_number_or("sweep", "delta_hz", 0.0));

    const double f_c = rad_to_hz(setup.params.cavity_frequency);
    for (std::size_t k = 0; k < inversions.size(); ++k) {
        csvio::Table table;
        table.columns = {"frequency_hz", "re_a", "im_a", "abs_a2"};
        for (int i = 0; i < points; ++i) {
            const double f = f_c - span_hz + 2.0 * span_hz * i / (points - 1);
            const auto a = dynamics::steady_state_transmission(
                setup.params, setup.bins, hz_to_rad(f), inversions[k], drive_amp, delta);
            table.rows.push_back({f, a.real(), a.imag(), std::norm(a)});
        }
        stager.add_table("transmission_p_" + std::to_string(k) + ".csv", table);
    }
}

void run_inversion_scan(const config::ConfigFile& cfg, const Setup& setup, Stager& stager) {
    pulses::ChirpSpec chirp;
    chirp.duration = cfg.get_number_or("inversion_pulse", "duration_ns", 400.0) * 1e-9;
    chirp.envelope_fwhm =
        cfg.get_number_or("inversion_pulse", "envelope_fwhm_ns",
                          0.5 * chirp.duration * 1e9) * 1e-9;
    const double span_mult = cfg.get_number_or("inversion_pulse", "sweep_span_gammaq", 16.0);
    chirp.sweep_span = span_mult * setup.params.distribution.fwhm_gamma_q;
    chirp.center = hz_to_rad(cfg.get_number_or("inversion_pulse", "center_offset_hz", 0.0));
    const double dt = cfg.get_number_or("inversion_pulse", "dt_ns", 0.25) * 1e-9;
    const auto amplitudes = cfg.get_numbers("inversion_pulse", "amplitudes");

    const auto scan = pulses::scan_inversion_amplitude(setup.params, setup.bins, chirp,
                                                       amplitudes, dt, setup.integrator);
    csvio::Table table;
    table.columns = {"amplitude", "efficiency", "p_final"};
    for (const auto& point : scan.points)
        table.rows.push_back({point.amplitude, point.efficiency, point.p_final});
    stager.add_table("inversion_scan.csv", table);

    // best-amplitude drive waveform for comparison with instrument data
    chirp.peak_target_amplitude = scan.best.amplitude;
    const auto target = pulses::chirp_target(chirp, dt);
    const auto drive = pulses::compensate_drive(target, setup.params, 0.0, dt,
                                                setup.params.cavity_frequency);
    auto wf = csvio::waveform_table(drive);
    wf.columns.push_back("abs_target");
    for (std::size_t i = 0; i < wf.rows.size(); ++i)
        wf.rows[i].push_back(i < target.size() ? std::abs(target[i]) : 0.0);
    stager.add_table("inversion_pulse_iq.csv", wf);
}

void run_calibration(const config::ConfigFile& cfg, Stager& stager) {
    std::string report;
    const double omega_c =
        cfg.has_section("system")
            ? hz_to_rad(cfg.get_number("system", "cavity_frequency_hz"))
            : hz_to_rad(3.105e9);

    if (cfg.has_section("ports")) {
        calibration::PortCouplings ports;
        ports.kappa1 = hz_to_rad(cfg.get_number("ports", "kappa1_hz"));
        ports.kappa2 = hz_to_rad(cfg.get_number("ports", "kappa2_hz"));
        ports.kappa_tot = hz_to_rad(cfg.get_number("ports", "kappa_tot_hz"));
        ports.a1 = db_to_power(cfg.get_number_or("ports", "a1_db", 0.0));
        ports.a2 = db_to_power(cfg.get_number_or("ports", "a2_db", 0.0));
        ports.a3 = db_to_power(cfg.get_number_or("ports", "a3_db", 0.0));
        const auto s = calibration::s_parameters_on_resonance(ports);
        csvio::Table table;
        table.columns = {"s11_db", "s31_db", "s32_db"};
        table.rows.push_back({power_to_db(s.s11), power_to_db(s.s31), power_to_db(s.s32)});
        stager.add_table("sparams_resonance.csv", table);
        report += "on-resonance S-parameters written to sparams_resonance.csv\n";
    }

    csvio::Table photons;
    photons.columns = {"power_w", "attenuation_db", "kappa_in_hz", "kappa_tot_hz",
                       "duration_ns", "photons"};
    for (const auto& section : cfg.section_names()) {
        if (section.rfind("pulse_photons.", 0) != 0)
            continue;
        const double power = cfg.get_number(section, "power_w");
        const double att_db = cfg.get_number(section, "attenuation_db") +
                              cfg.get_number_or(section, "cold_correction_db", 5.0);
        const double kin = hz_to_rad(cfg.get_number(section, "kappa_in_hz"));
        const double ktot = hz_to_rad(cfg.get_number(section, "kappa_tot_hz"));
        const double dur = cfg.get_number(section, "duration_ns") * 1e-9;
        const double n = calibration::pulse_photons(power, omega_c, db_to_power(att_db), kin,
                                                    ktot, dur);
        photons.rows.push_back({power, att_db, rad_to_hz(kin), rad_to_hz(ktot), dur * 1e9, n});
        report += section + ": " + csvio::format_value(n) + " photons\n";
    }
    if (!photons.rows.empty())
        stager.add_table("photon_estimates.csv", photons);

    csvio::Table ladder_table;
    ladder_table.columns = {"line", "base_occupancy"};
    double total = 0.0;
    const auto lines = config::ladder_lines(cfg);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto ladder = config::load_ladder(cfg, lines[i]);
        const auto result = calibration::thermal_ladder(ladder, omega_c);
        ladder_table.rows.push_back({static_cast<double>(i), result.base});
        total += result.base;
        report += "ladder." + lines[i] + ": base occupancy " +
                  csvio::format_value(result.base) + "\n";
    }
    if (!lines.empty()) {
        ladder_table.rows.push_back({static_cast<double>(lines.size()), total});
        stager.add_table("thermal_ladder.csv", ladder_table);
        report += "total base occupancy " + csvio::format_value(total) + "\n";
    }

    if (cfg.has_section("dispersive") && cfg.has_section("system")) {
        const double g = hz_to_rad(cfg.get_number("system", "collective_coupling_hz"));
        const double delta = hz_to_rad(cfg.get_number("dispersive", "delta_hz"));
        const double p = cfg.get_number("dispersive", "inversion");
        bool regime = false;
        const double chi = calibration::dispersive_shift(g, delta, p, &regime);
        report += "dispersive shift chi/2pi = " + csvio::format_value(rad_to_hz(chi)) +
                  " Hz" + (regime ? "" : " (outside dispersive regime)") + "\n";
    }
    stager.add("calibration_report.txt", report);
}

} // namespace

ValidationReport validate_config(const config::ConfigFile& cfg) {
    ValidationReport report;
    auto error = [&](const std::string& m) {
        report.issues.push_back({Issue::Severity::error, m});
    };
    auto warn = [&](const std::string& m) {
        report.issues.push_back({Issue::Severity::warning, m});
    };
    auto info = [&](const std::string& m) {
        report.issues.push_back({Issue::Severity::info, m});
    };

    // unknown sections/keys
    for (const auto& section : cfg.section_names()) {
        if (!section_is_known(section)) {
            warn("unknown section [" + section + "]");
            continue;
        }
        const auto& allowed = keys_for(section);
        for (const auto& key : cfg.keys(section))
            if (!allowed.count(key))
                warn("unknown key " + section + "." + key);
    }

    Kind kind;
    try {
        kind = kind_from_string(cfg.get_string("scenario", "kind"));
    } catch (const std::exception& e) {
        error(e.what());
        return report;
    }

    if (kind != Kind::calibration) {
        ensemble::SystemParams params;
        try {
            params = config::load_system_params(cfg);
        } catch (const std::exception& e) {
            error(e.what());
            return report;
        }
        if (params.cavity_halfwidth >= params.cavity_frequency)
            error("system: kappa must be far below the cavity frequency");
        if (params.distribution.fwhm_gamma_q >= params.cavity_frequency)
            error("distribution: fwhm must be far below the cavity frequency");

        const double gamma_eff = ensemble::effective_linewidth(
            params.distribution, params.spin_halfwidth,
            params.distribution.center_frequency);
        const double coop = ensemble::cooperativity(params, gamma_eff);
        info("cooperativity C = " + csvio::format_value(coop));

        double p = 0.0;
        if (kind == Kind::triggered_sr) {
            p = cfg.get_number_or("montecarlo", "inversion",
                                  cfg.get_number_or("montecarlo", "pc", 0.0) / coop);
            if (!cfg.has_key("montecarlo", "etas") &&
                !cfg.has_key("montecarlo", "trigger_photons"))
                error("montecarlo: need etas or trigger_photons");
        } else if (kind == Kind::pulse_train) {
            p = cfg.get_number_or("pulse_train", "inversion",
                                  cfg.get_number_or("pulse_train", "pc", 0.0) / coop);
            if (!cfg.has_key("pulse_train", "drive_amplitude") &&
                !cfg.has_key("pulse_train", "pulse_photons"))
                error("pulse_train: need drive_amplitude or pulse_photons");
        } else if (kind == Kind::self_decay) {
            if (!cfg.has_key("self_decay", "inversions") &&
                !cfg.has_key("self_decay", "hold_times_ms"))
                error("self_decay: need inversions or hold_times_ms");
            if (cfg.has_key("self_decay", "inversions")) {
                const auto ps = cfg.get_numbers("self_decay", "inversions");
                p = *std::max_element(ps.begin(), ps.end());
            }
        } else if (kind == Kind::inversion_scan) {
            if (!cfg.has_key("inversion_pulse", "amplitudes"))
                error("inversion_pulse.amplitudes is required");
        }
        if (p != 0.0) {
            const double pc = p * coop;
            info("p*C = " + csvio::format_value(pc) +
                 (dynamics::threshold_check(p, coop) ? ": above threshold"
                                                     : ": below threshold"));
        }
    }
    return report;
}

ValidationReport validate_config_file(const std::filesystem::path& path) {
    return validate_config(config::parse_file(path.string()));
}

RunResult run_scenario(const config::ConfigFile& cfg, const RunOptions& options) {
    const auto report = validate_config(cfg);
    if (!report.ok())
        throw ConfigError("config validation failed:\n" + report.to_text());

    const Kind kind = kind_from_string(cfg.get_string("scenario", "kind"));
    Stager stager;

    // normalized config copy makes runs self-describing and lets
    // plot-data recover the scenario kind
    stager.add("config.cfg", config::serialize(cfg));

    if (kind == Kind::calibration) {
        run_calibration(cfg, stager);
    } else {
        const Setup setup = load_setup(cfg);
        switch (kind) {
            case Kind::self_decay: run_self_decay(cfg, setup, stager); break;
            case Kind::triggered_sr: run_triggered_sr(cfg, setup, stager, options); break;
            case Kind::pulse_train: run_pulse_train(cfg, setup, stager); break;
            case Kind::transmission_sweep: run_transmission_sweep(cfg, setup, stager); break;
            case Kind::inversion_scan: run_inversion_scan(cfg, setup, stager); break;
            case Kind::calibration: break;
        }
    }
    return stager.commit(options.out_dir);
}

RunResult run_scenario_file(const std::filesystem::path& config_path,
                            const RunOptions& options) {
    return run_scenario(config::parse_file(config_path.string()), options);
}

RunResult emit_plot_data(const std::filesystem::path& run_dir,
                         const std::filesystem::path& out_dir) {
    if (!std::filesystem::exists(run_dir / "manifest.csv"))
        throw std::runtime_error("emit_plot_data: missing manifest at " +
                                 (run_dir / "manifest.csv").string());
    const auto cfg = config::parse_file((run_dir / "config.cfg").string());
    const Kind kind = kind_from_string(cfg.get_string("scenario", "kind"));

    Stager stager;
    std::string schema;

    if (kind == Kind::self_decay) {
        const auto maxima = csvio::read_csv(run_dir / "self_decay_maxima.csv");
        csvio::Table fig1c;
        fig1c.columns = {"curve", "p", "t", "amp"};
        for (std::size_t i = 0; i < maxima.rows.size(); ++i) {
            const auto traj =
                csvio::read_csv(run_dir / ("self_decay_traj_" + std::to_string(i) + ".csv"));
            for (const auto& row : traj.rows)
                fig1c.rows.push_back({static_cast<double>(i), maxima.rows[i][1], row[0],
                                      std::hypot(row[1], row[2])});
        }
        stager.add_table("fig1c.csv", fig1c);
        schema += "fig1c.csv: curve index, inversion p, time s, |a| sqrt(photon)\n";

        csvio::Table inset;
        inset.columns = {"index", "p", "hold_ms", "max_amp"};
        for (const auto& row : maxima.rows)
            inset.rows.push_back({row[0], row[1], row[2], row[4]});
        stager.add_table("fig1c_inset.csv", inset);
        schema += "fig1c_inset.csv: curve index, inversion p, hold time ms, burst maximum\n";
    } else if (kind == Kind::triggered_sr) {
        std::ifstream in(run_dir / "summary.json");
        if (!in)
            throw std::runtime_error("emit_plot_data: summary.json missing");
        json summary = json::parse(in);

        csvio::Table fig2d;
        fig2d.columns = {"eta", "n_trig", "coherence", "ci_low", "ci_high"};
        for (const auto& row : summary)
            fig2d.rows.push_back({row["eta"], row["n_trig"], row["coherence"],
                                  row["ci_low"], row["ci_high"]});
        stager.add_table("fig2d.csv", fig2d);
        schema += "fig2d.csv: displacement eta, trigger photons, pairwise phase coherence "
                  "with 95% jackknife interval\n";

        csvio::Table fig2e, figS2a;
        fig2e.columns = {"eta", "shot", "t_d_rescaled"};
        figS2a.columns = {"t_d", "max_amp", "phase", "eta"};
        for (std::size_t k = 0;; ++k) {
            const auto rescaled_path =
                run_dir / ("shots_rescaled_eta_" + std::to_string(k) + ".csv");
            const auto raw_path = run_dir / ("shots_eta_" + std::to_string(k) + ".csv");
            if (!std::filesystem::exists(rescaled_path))
                break;
            const auto rescaled = csvio::read_csv(rescaled_path);
            for (const auto& row : rescaled.rows)
                fig2e.rows.push_back({row[6], row[0], row[1]});
            const auto raw = csvio::read_csv(raw_path);
            for (const auto& row : raw.rows)
                figS2a.rows.push_back({row[1], row[4], row[5], row[6]});
        }
        stager.add_table("fig2e.csv", fig2e);
        schema += "fig2e.csv: eta, shot index, rescaled delay time s\n";
        stager.add_table("figS2a.csv", figS2a);
        schema += "figS2a.csv: raw delay time s, burst maximum, phase rad, eta\n";
    } else if (kind == Kind::pulse_train) {
        const auto spins = csvio::read_csv(run_dir / "pulse_train_spins.csv");
        const auto empty = csvio::read_csv(run_dir / "pulse_train_empty.csv");
        csvio::Table fig3a;
        fig3a.columns = {"t", "amp_spins", "amp_empty", "delta_amp"};
        const std::size_t n = std::min(spins.rows.size(), empty.rows.size());
        for (std::size_t i = 0; i < n; ++i) {
            const double as = std::hypot(spins.rows[i][1], spins.rows[i][2]);
            const double ae = std::hypot(empty.rows[i][1], empty.rows[i][2]);
            fig3a.rows.push_back({spins.rows[i][0], as, ae, as - ae});
        }
        stager.add_table("fig3a.csv", fig3a);
        schema += "fig3a.csv: time s, |a| with spins, |a| empty cavity, difference\n";
    } else if (kind == Kind::transmission_sweep) {
        csvio::Table figS3a;
        figS3a.columns = {"sweep", "frequency_hz", "abs_a2"};
        for (std::size_t k = 0;; ++k) {
            const auto path = run_dir / ("transmission_p_" + std::to_string(k) + ".csv");
            if (!std::filesystem::exists(path))
                break;
            const auto table = csvio::read_csv(path);
            for (const auto& row : table.rows)
                figS3a.rows.push_back({static_cast<double>(k), row[0], row[3]});
        }
        stager.add_table("figS3a.csv", figS3a);
        schema += "figS3a.csv: sweep index, probe frequency Hz, |a_ss|^2\n";
    } else if (kind == Kind::inversion_scan) {
        const auto scan = csvio::read_csv(run_dir / "inversion_scan.csv");
        csvio::Table fig;
        fig.columns = scan.columns;
        fig.rows = scan.rows;
        stager.add_table("figS1_scan.csv", fig);
        schema += "figS1_scan.csv: chirp amplitude, inversion efficiency, final p\n";
        const auto iq = csvio::read_csv(run_dir / "inversion_pulse_iq.csv");
        csvio::Table pulse;
        pulse.columns = iq.columns;
        pulse.rows = iq.rows;
        stager.add_table("figS1_pulse.csv", pulse);
        schema += "figS1_pulse.csv: time s, I, Q (eta = I - iQ), |a_target|\n";
    } else {
        throw std::runtime_error("emit_plot_data: no plot bundles for calibration runs");
    }

    stager.add("plot_schema.txt", schema);
    return stager.commit(out_dir);
}

} // namespace srsim::scenario
