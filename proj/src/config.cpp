#include "srsim/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "srsim/errors.hpp"
#include "srsim/units.hpp"

namespace srsim::config {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

bool ConfigFile::has_section(const std::string& name) const {
    for (const auto& [sec, _] : sections)
        if (sec == name)
            return true;
    return false;
}

bool ConfigFile::has_key(const std::string& section, const std::string& key) const {
    return find(section, key).has_value();
}

std::vector<std::string> ConfigFile::section_names() const {
    std::vector<std::string> out;
    out.reserve(sections.size());
    for (const auto& [sec, _] : sections)
        out.push_back(sec);
    return out;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
    std::vector<std::string> out;
    for (const auto& [sec, kvs] : sections)
        if (sec == section)
            for (const auto& [k, _] : kvs)
                out.push_back(k);
    return out;
}

std::optional<std::string> ConfigFile::find(const std::string& section,
                                            const std::string& key) const {
    for (const auto& [sec, kvs] : sections)
        if (sec == section)
            for (const auto& [k, v] : kvs)
                if (k == key)
                    return v;
    return std::nullopt;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    auto v = find(section, key);
    if (!v)
        throw ConfigError("missing required field " + section + "." + key);
    return *v;
}

double ConfigFile::get_number(const std::string& section, const std::string& key) const {
    const std::string raw = get_string(section, key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (trim(raw.substr(pos)).empty())
            return v;
    } catch (...) {
    }
    throw ConfigError("field " + section + "." + key + " is not a number: '" + raw + "'");
}

long long ConfigFile::get_integer(const std::string& section, const std::string& key) const {
    const double v = get_number(section, key);
    const auto r = static_cast<long long>(std::llround(v));
    if (std::abs(v - static_cast<double>(r)) > 1e-9 * std::max(1.0, std::abs(v)))
        throw ConfigError("field " + section + "." + key + " is not an integer");
    return r;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key) const {
    const std::string raw = get_string(section, key);
    if (raw == "true" || raw == "on" || raw == "1")
        return true;
    if (raw == "false" || raw == "off" || raw == "0")
        return false;
    throw ConfigError("field " + section + "." + key + " is not a boolean: '" + raw + "'");
}

std::vector<double> ConfigFile::get_numbers(const std::string& section,
                                            const std::string& key) const {
    const std::string raw = get_string(section, key);
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw ConfigError("field " + section + "." + key + " has a non-numeric entry: '" +
                              item + "'");
        }
    }
    if (out.empty())
        throw ConfigError("field " + section + "." + key + " is an empty list");
    return out;
}

double ConfigFile::get_number_or(const std::string& section, const std::string& key,
                                 double fallback) const {
    return has_key(section, key) ? get_number(section, key) : fallback;
}

long long ConfigFile::get_integer_or(const std::string& section, const std::string& key,
                                     long long fallback) const {
    return has_key(section, key) ? get_integer(section, key) : fallback;
}

std::string ConfigFile::get_string_or(const std::string& section, const std::string& key,
                                      std::string fallback) const {
    auto v = find(section, key);
    return v ? *v : std::move(fallback);
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key,
                             bool fallback) const {
    return has_key(section, key) ? get_bool(section, key) : fallback;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    for (auto& [sec, kvs] : sections) {
        if (sec == section) {
            for (auto& [k, v] : kvs) {
                if (k == key) {
                    v = value;
                    return;
                }
            }
            kvs.emplace_back(key, value);
            return;
        }
    }
    sections.push_back({section, {{key, value}}});
}

void ConfigFile::set_number(const std::string& section, const std::string& key, double value) {
    set(section, key, format_number(value));
}

ConfigFile parse(const std::string& text) {
    ConfigFile out;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';')
            continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            if (!out.has_section(section))
                out.sections.push_back({section, {}});
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        out.set(section, key, value);
    }
    return out;
}

ConfigFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string serialize(const ConfigFile& config) {
    std::string out;
    bool first = true;
    for (const auto& [sec, kvs] : config.sections) {
        if (!first)
            out += "\n";
        first = false;
        out += "[" + sec + "]\n";
        for (const auto& [k, v] : kvs)
            out += k + " = " + v + "\n";
    }
    return out;
}

void write_file(const ConfigFile& config, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write config file: " + path);
    out << serialize(config);
}

ensemble::QGaussianSpec load_distribution(const ConfigFile& cfg, const std::string& section) {
    ensemble::QGaussianSpec spec;
    spec.center_frequency = hz_to_rad(cfg.get_number(section, "center_frequency_hz"));
    spec.fwhm_gamma_q = hz_to_rad(cfg.get_number(section, "fwhm_hz"));
    spec.shape_q = cfg.get_number(section, "shape_q");
    spec.validate();
    return spec;
}

ensemble::SystemParams load_system_params(const ConfigFile& cfg) {
    ensemble::SystemParams p;
    p.cavity_frequency = hz_to_rad(cfg.get_number("system", "cavity_frequency_hz"));
    p.cavity_halfwidth = hz_to_rad(cfg.get_number("system", "cavity_halfwidth_hz"));
    p.collective_coupling = hz_to_rad(cfg.get_number("system", "collective_coupling_hz"));
    p.spin_halfwidth = hz_to_rad(cfg.get_number("system", "spin_halfwidth_hz"));
    p.total_spins = cfg.get_number("system", "total_spins");
    if (cfg.has_section("distribution")) {
        p.distribution = load_distribution(cfg);
    } else {
        p.distribution.center_frequency = p.cavity_frequency;
        p.distribution.fwhm_gamma_q = hz_to_rad(cfg.get_number("system", "fwhm_hz"));
        p.distribution.shape_q = cfg.get_number("system", "shape_q");
    }
    p.validate();
    return p;
}

void store_distribution(ConfigFile& cfg, const ensemble::QGaussianSpec& spec,
                        const std::string& section) {
    cfg.set_number(section, "center_frequency_hz", rad_to_hz(spec.center_frequency));
    cfg.set_number(section, "fwhm_hz", rad_to_hz(spec.fwhm_gamma_q));
    cfg.set_number(section, "shape_q", spec.shape_q);
}

void store_system_params(ConfigFile& cfg, const ensemble::SystemParams& params) {
    cfg.set_number("system", "cavity_frequency_hz", rad_to_hz(params.cavity_frequency));
    cfg.set_number("system", "cavity_halfwidth_hz", rad_to_hz(params.cavity_halfwidth));
    cfg.set_number("system", "collective_coupling_hz", rad_to_hz(params.collective_coupling));
    cfg.set_number("system", "spin_halfwidth_hz", rad_to_hz(params.spin_halfwidth));
    cfg.set_number("system", "total_spins", params.total_spins);
    store_distribution(cfg, params.distribution);
}

calibration::StageLadder load_ladder(const ConfigFile& cfg, const std::string& line) {
    const std::string section = "ladder." + line;
    const std::string raw = cfg.get_string(section, "stages");
    calibration::StageLadder ladder;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        calibration::Stage stage;
        const auto colon = item.find(':');
        try {
            if (colon == std::string::npos) {
                stage.temperature = std::stod(item);
                stage.attenuation_db_to_next = 0.0;
            } else {
                stage.temperature = std::stod(item.substr(0, colon));
                stage.attenuation_db_to_next = std::stod(item.substr(colon + 1));
            }
        } catch (...) {
            throw ConfigError("field " + section + ".stages has a malformed entry: '" + item +
                              "'");
        }
        ladder.stages.push_back(stage);
    }
    ladder.validate();
    return ladder;
}

std::vector<std::string> ladder_lines(const ConfigFile& cfg) {
    std::vector<std::string> out;
    for (const auto& name : cfg.section_names())
        if (name.rfind("ladder.", 0) == 0)
            out.push_back(name.substr(7));
    return out;
}

} // namespace srsim::config
