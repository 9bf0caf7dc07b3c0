// csvio.hpp — CSV and binary export, run manifests
//
// CSV bodies are written with "%.12g" formatting so that identical inputs
// produce byte-identical files. The manifest lists every artifact of a
// run with its FNV-1a 64-bit content hash, which is what the determinism
// checks compare.

#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "srsim/calibration.hpp"
#include "srsim/dynamics.hpp"
#include "srsim/stochastic.hpp"

namespace srsim::csvio {

std::string format_value(double v);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string to_csv(const Table& table);
Table read_csv(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& body);

// t, re_a, im_a, n, p, s_minus_abs
Table trajectory_table(const dynamics::Trajectory& traj);

// shot, t_d, i_d, q_d, max_amp, phase, eta, n_trig
Table shot_table(const stochastic::ShotSet& set);

// t, i, q (drive waveform exchange format)
Table waveform_table(const pulses::DriveWaveform& waveform);
pulses::DriveWaveform waveform_from_table(const Table& table, double carrier_frequency);

// Little-endian binary trajectory export. Layout: 8-byte magic "SRTRAJ01",
// uint64 row count, then rows of six float64: t, re_a, im_a, n, p,
// s_minus_abs.
std::string trajectory_binary(const dynamics::Trajectory& traj);
void write_trajectory_binary(const std::filesystem::path& path,
                             const dynamics::Trajectory& traj);

// (frequency_hz, s_param_db) trace exchange used by the calibration fits
calibration::Trace trace_from_table(const Table& table);
Table trace_table(const calibration::Trace& trace);

std::uint64_t fnv1a64(const std::string& bytes);

struct Manifest {
    // (relative path, byte count, hash) per artifact, in write order
    struct Entry {
        std::string name;
        std::uint64_t bytes = 0;
        std::uint64_t hash = 0;
    };
    std::vector<Entry> entries;

    void add(const std::string& name, const std::string& body);
    std::string serialize() const;
};

} // namespace srsim::csvio
