// support.hpp — shared test fixtures and oracles

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "srsim/ensemble.hpp"
#include "srsim/units.hpp"

namespace srsim::test {

// parameter set of the experiment the simulator reproduces
inline ensemble::SystemParams measured_params() {
    ensemble::SystemParams p;
    p.cavity_frequency = hz_to_rad(3.105e9);
    p.cavity_halfwidth = hz_to_rad(0.51e6);
    p.collective_coupling = hz_to_rad(5.17e6);
    p.spin_halfwidth = hz_to_rad(208e3);
    p.distribution.center_frequency = p.cavity_frequency;
    p.distribution.fwhm_gamma_q = hz_to_rad(11.0e6);
    p.distribution.shape_q = 1.39;
    p.total_spins = 6.4e12;
    return p;
}

// two-sided Kolmogorov-Smirnov statistic of samples against a model CDF
template <typename Cdf>
double ks_statistic(std::vector<double> samples, const Cdf& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
    }
    return d;
}

// asymptotic critical value, alpha = 0.01: c(alpha) = 1.628 / sqrt(n)
inline double ks_critical_alpha01(std::size_t n) {
    return 1.628 / std::sqrt(static_cast<double>(n));
}

} // namespace srsim::test
