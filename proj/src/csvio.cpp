#include "srsim/csvio.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srsim::csvio {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c)
            out += ',';
        out += table.columns[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw std::invalid_argument("to_csv: ragged row");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c)
                out += ',';
            out += format_value(row[c]);
        }
        out += '\n';
    }
    return out;
}

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_csv: cannot open " + path.string());
    Table table;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_csv: empty file " + path.string());
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ','))
        table.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ','))
            row.push_back(std::stod(cell));
        if (row.size() != table.columns.size())
            throw std::runtime_error("read_csv: ragged row in " + path.string());
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_text: cannot open " + path.string());
    out << body;
}

Table trajectory_table(const dynamics::Trajectory& traj) {
    Table t;
    t.columns = {"t", "re_a", "im_a", "n", "p", "s_minus_abs"};
    t.rows.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto a = traj.cavity_amplitude[i];
        t.rows.push_back({traj.times[i], a.real(), a.imag(), std::norm(a), traj.inversion[i],
                          traj.transverse_magnitude[i]});
    }
    return t;
}

Table shot_table(const stochastic::ShotSet& set) {
    Table t;
    t.columns = {"shot", "t_d", "i_d", "q_d", "max_amp", "phase", "eta", "n_trig"};
    t.rows.reserve(set.records.size());
    for (std::size_t i = 0; i < set.records.size(); ++i) {
        const auto& r = set.records[i];
        t.rows.push_back({static_cast<double>(i), r.t_d, r.i_d, r.q_d, r.max_amp, r.phase,
                          set.displacement_eta, set.trigger_photons});
    }
    return t;
}

Table waveform_table(const pulses::DriveWaveform& waveform) {
    Table t;
    t.columns = {"t", "i", "q"};
    t.rows.reserve(waveform.samples.size());
    for (std::size_t k = 0; k < waveform.samples.size(); ++k) {
        // eta = I - iQ
        const auto s = waveform.samples[k];
        t.rows.push_back({static_cast<double>(k) * waveform.sample_period, s.real(),
                          -s.imag()});
    }
    return t;
}

pulses::DriveWaveform waveform_from_table(const Table& table, double carrier_frequency) {
    if (table.columns.size() != 3 || table.rows.size() < 2)
        throw std::invalid_argument("waveform_from_table: expected t,i,q with >= 2 rows");
    pulses::DriveWaveform w;
    w.carrier_frequency = carrier_frequency;
    w.sample_period = table.rows[1][0] - table.rows[0][0];
    w.samples.reserve(table.rows.size());
    for (const auto& row : table.rows)
        w.samples.emplace_back(row[1], -row[2]);
    w.validate();
    return w;
}

std::string trajectory_binary(const dynamics::Trajectory& traj) {
    static_assert(std::endian::native == std::endian::little,
                  "binary trajectory layout is little-endian");
    std::string out;
    out.reserve(16 + traj.size() * 48);
    out.append("SRTRAJ01", 8);
    const std::uint64_t count = traj.size();
    out.append(reinterpret_cast<const char*>(&count), 8);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto a = traj.cavity_amplitude[i];
        const double row[6] = {traj.times[i],     a.real(), a.imag(), std::norm(a),
                               traj.inversion[i], traj.transverse_magnitude[i]};
        out.append(reinterpret_cast<const char*>(row), sizeof row);
    }
    return out;
}

void write_trajectory_binary(const std::filesystem::path& path,
                             const dynamics::Trajectory& traj) {
    write_text(path, trajectory_binary(traj));
}

calibration::Trace trace_from_table(const Table& table) {
    if (table.columns.size() != 2)
        throw std::invalid_argument("trace_from_table: expected frequency_hz,s_param_db");
    calibration::Trace trace;
    for (const auto& row : table.rows) {
        trace.frequency.push_back(row[0]);
        trace.value_db.push_back(row[1]);
    }
    return trace;
}

Table trace_table(const calibration::Trace& trace) {
    Table t;
    t.columns = {"frequency_hz", "s_param_db"};
    for (std::size_t i = 0; i < trace.frequency.size(); ++i)
        t.rows.push_back({trace.frequency[i], trace.value_db[i]});
    return t;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void Manifest::add(const std::string& name, const std::string& body) {
    entries.push_back({name, body.size(), fnv1a64(body)});
}

std::string Manifest::serialize() const {
    std::string out = "artifact,bytes,fnv1a64\n";
    for (const auto& e : entries) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(e.hash));
        out += e.name + "," + std::to_string(e.bytes) + "," + buf + "\n";
    }
    return out;
}

} // namespace srsim::csvio
