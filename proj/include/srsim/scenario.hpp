// scenario.hpp — config-driven experiment reproduction
//
// One scenario per run, read from a structured text config. Outputs are
// accumulated in memory and written atomically at the end through a
// single writer, together with a manifest of content hashes; a failed run
// leaves no partial artifacts behind. Fixed seeds give byte-identical
// output bodies.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srsim/config.hpp"
#include "srsim/csvio.hpp"

namespace srsim::scenario {

enum class Kind {
    self_decay,
    triggered_sr,
    pulse_train,
    transmission_sweep,
    inversion_scan,
    calibration,
};

Kind kind_from_string(const std::string& name);
std::string to_string(Kind kind);

struct RunOptions {
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;       // 0 = take the config's seed
    int jobs = 1;
    std::string format = "csv";   // csv | json (summaries)
};

struct RunResult {
    std::filesystem::path out_dir;
    std::vector<std::string> artifacts;  // relative names, manifest order
};

struct Issue {
    enum class Severity { error, warning, info };
    Severity severity = Severity::error;
    std::string message;
};

struct ValidationReport {
    std::vector<Issue> issues;
    bool ok() const;
    std::string to_text() const;
};

// Structural and physical checks: unknown keys, missing required fields,
// unit sanity (e.g. kappa < omega_c), and the threshold pre-check p*C.
ValidationReport validate_config(const config::ConfigFile& cfg);
ValidationReport validate_config_file(const std::filesystem::path& path);

RunResult run_scenario(const config::ConfigFile& cfg, const RunOptions& options);
RunResult run_scenario_file(const std::filesystem::path& config_path,
                            const RunOptions& options);

// Per-figure CSV bundles derived from a completed run directory (fig1c,
// fig2d, fig2e, fig3a, figS2a ... depending on the scenario), plus a
// sidecar plot_schema.txt documenting every column.
RunResult emit_plot_data(const std::filesystem::path& run_dir,
                         const std::filesystem::path& out_dir);

// p(hold) entry point: stretched-exponential hold model with exponent 1/2,
// p = p0 * exp(-sqrt(hold/tau0)).
double hold_time_to_inversion(double hold, double p0, double tau0);

} // namespace srsim::scenario
