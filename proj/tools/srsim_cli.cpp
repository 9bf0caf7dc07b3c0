// srsim_cli.cpp — scenario runner command line
//
// Subcommands: run, validate, plot-data, calibrate.
// Exit codes: 0 success, 2 config error, 3 runtime error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "srsim/errors.hpp"
#include "srsim/scenario.hpp"

namespace {

int run_command(const std::string& config_path, const srsim::scenario::RunOptions& options) {
    const auto result = srsim::scenario::run_scenario_file(config_path, options);
    std::printf("run complete: %zu artifacts in %s\n", result.artifacts.size(),
                result.out_dir.string().c_str());
    for (const auto& name : result.artifacts)
        std::printf("  %s\n", name.c_str());
    return 0;
}

int validate_command(const std::string& config_path) {
    const auto report = srsim::scenario::validate_config_file(config_path);
    std::fputs(report.to_text().c_str(), stdout);
    return report.ok() ? 0 : 2;
}

int plot_data_command(const std::string& run_dir, const std::string& out_dir) {
    const auto result = srsim::scenario::emit_plot_data(run_dir, out_dir);
    std::printf("plot data: %zu files in %s\n", result.artifacts.size(),
                result.out_dir.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"superradiance ensemble simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string format = "csv";
    std::string run_dir;

    auto* run = app.add_subcommand("run", "run a scenario from a config file");
    run->add_option("--config", config_path, "scenario config path")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--jobs", jobs, "shot-level worker cap");
    run->add_option("--format", format, "summary format")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* validate = app.add_subcommand("validate", "check a config without running");
    validate->add_option("--config", config_path, "scenario config path")->required();

    auto* plot = app.add_subcommand("plot-data", "emit per-figure CSV bundles from a run");
    plot->add_option("--run", run_dir, "completed run directory")->required();
    plot->add_option("--out", out_dir, "output directory");

    auto* calibrate = app.add_subcommand("calibrate", "run the calibration chain");
    calibrate->add_option("--config", config_path, "calibration config path")->required();
    calibrate->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        srsim::scenario::RunOptions options;
        options.out_dir = out_dir;
        options.seed = seed;
        options.jobs = jobs;
        options.format = format;
        if (run->parsed())
            return run_command(config_path, options);
        if (validate->parsed())
            return validate_command(config_path);
        if (plot->parsed())
            return plot_data_command(run_dir, out_dir);
        if (calibrate->parsed())
            return run_command(config_path, options);
    } catch (const srsim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 3;
    }
    return 0;
}
