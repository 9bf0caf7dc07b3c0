// config.hpp — structured text configuration
//
// Simple sectioned key-value format:
//
//   # comment
//   [system]
//   cavity_frequency_hz = 3.105e9
//
//   [ladder.pump]
//   stages = 0.9:-1.5, 0.12:-2.0, 0.025
//
// Frequencies in files are ordinary frequency (Hz) and are converted to
// angular units (factor exactly 2*pi) when domain objects are built.
// serialize(parse(text)) is idempotent after the first normalization.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srsim/calibration.hpp"
#include "srsim/ensemble.hpp"

namespace srsim::config {

struct ConfigFile {
    // section -> ordered list of (key, value); sections keep insertion order
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>
        sections;

    bool has_section(const std::string& name) const;
    bool has_key(const std::string& section, const std::string& key) const;
    std::vector<std::string> section_names() const;
    std::vector<std::string> keys(const std::string& section) const;

    // typed getters; throw ConfigError naming section.key when missing/bad
    std::string get_string(const std::string& section, const std::string& key) const;
    double get_number(const std::string& section, const std::string& key) const;
    long long get_integer(const std::string& section, const std::string& key) const;
    bool get_bool(const std::string& section, const std::string& key) const;
    std::vector<double> get_numbers(const std::string& section, const std::string& key) const;

    std::optional<std::string> find(const std::string& section, const std::string& key) const;
    double get_number_or(const std::string& section, const std::string& key,
                         double fallback) const;
    long long get_integer_or(const std::string& section, const std::string& key,
                             long long fallback) const;
    std::string get_string_or(const std::string& section, const std::string& key,
                              std::string fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);
    void set_number(const std::string& section, const std::string& key, double value);
};

ConfigFile parse(const std::string& text);
ConfigFile parse_file(const std::string& path);
std::string serialize(const ConfigFile& config);
void write_file(const ConfigFile& config, const std::string& path);

// domain objects <-> config sections (Hz at the boundary)
ensemble::QGaussianSpec load_distribution(const ConfigFile& cfg,
                                          const std::string& section = "distribution");
ensemble::SystemParams load_system_params(const ConfigFile& cfg);
void store_distribution(ConfigFile& cfg, const ensemble::QGaussianSpec& spec,
                        const std::string& section = "distribution");
void store_system_params(ConfigFile& cfg, const ensemble::SystemParams& params);

// "[ladder.<line>]" sections: stages = T1:dB1, T2:dB2, ..., Tn
calibration::StageLadder load_ladder(const ConfigFile& cfg, const std::string& line);
std::vector<std::string> ladder_lines(const ConfigFile& cfg);

} // namespace srsim::config
