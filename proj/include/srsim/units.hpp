// units.hpp — unit conventions and physical constants
//
// All frequencies and rates are angular (rad/s) inside the library.
// Configuration files and CSV outputs use ordinary frequency (Hz);
// the conversion factor is exactly 2*pi and happens only at the I/O
// boundary. Cavity amplitudes are in sqrt(photon) units, n = |a|^2.

#pragma once

#include <cmath>

namespace srsim {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// CODATA 2018 exact values
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_boltzmann = 1.380649e-23;    // J/K

inline constexpr double hz_to_rad(double f) { return two_pi * f; }
inline constexpr double rad_to_hz(double w) { return w / two_pi; }

// dB <-> linear power factor, 10^(dB/10)
inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
inline double power_to_db(double p) { return 10.0 * std::log10(p); }

} // namespace srsim
