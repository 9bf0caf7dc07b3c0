#include "srsim/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "srsim/math.hpp"
#include "srsim/units.hpp"

namespace srsim::stochastic {

void TippingDistribution::validate() const {
    if (!(width_theta > 0.0))
        throw std::invalid_argument("TippingDistribution: width_theta must be positive");
    if (displacement_eta < 0.0)
        throw std::invalid_argument("TippingDistribution: displacement_eta must be >= 0");
}

double rician_pdf(double theta, const TippingDistribution& dist) {
    dist.validate();
    if (theta < 0.0)
        throw std::invalid_argument("rician_pdf: theta must be >= 0");
    const double tb = dist.width_theta;
    const double eta = dist.displacement_eta;
    const double u = theta / tb;
    // theta/tb^2 exp(-(u - eta)^2/2) * [I0(u eta) e^{-u eta}]
    const double gauss = std::exp(-0.5 * (u - eta) * (u - eta));
    return u / tb * gauss * math::bessel_i0e(u * eta);
}

double rician_cdf(double theta, const TippingDistribution& dist) {
    if (theta <= 0.0)
        return 0.0;
    const double tb = dist.width_theta;
    const double eta = dist.displacement_eta;
    // integrate over the support actually carrying mass
    const double hi = std::min(theta, tb * (eta + 12.0));
    if (hi <= 0.0)
        return 0.0;
    const double cdf =
        math::integrate<double>([&](double th) { return rician_pdf(th, dist); }, 0.0, hi,
                                1e-10, 1e-14);
    return std::min(cdf, 1.0);
}

double angular_pdf(double phi, double eta) {
    if (eta < 0.0)
        throw std::invalid_argument("angular_pdf: eta must be >= 0");
    phi = math::wrap_angle(phi);
    const double t = eta * std::cos(phi);
    return std::exp(-0.5 * eta * eta) / two_pi +
           t * math::normal_cdf(t) * math::normal_pdf(eta * std::sin(phi));
}

double delay_from_theta(double theta, double t_r) {
    if (!(theta > 0.0) || !(theta < 2.0))
        throw std::invalid_argument("delay_from_theta: theta must lie in (0, 2)");
    if (!(t_r > 0.0))
        throw std::invalid_argument("delay_from_theta: T_R must be positive");
    return -2.0 * t_r * std::log(0.5 * theta);
}

double theta_from_delay(double t_d, double t_r) {
    if (!(t_r > 0.0))
        throw std::invalid_argument("theta_from_delay: T_R must be positive");
    if (!std::isfinite(t_d))
        throw std::invalid_argument("theta_from_delay: t_d must be finite");
    return 2.0 * std::exp(-0.5 * t_d / t_r);
}

double delay_pdf(double t_d, const TippingDistribution& dist, double t_r) {
    if (!(t_d > 0.0))
        throw std::invalid_argument("delay_pdf: t_d must be positive");
    const double theta = theta_from_delay(t_d, t_r);
    // |d theta / d t_d| = theta / (2 T_R)
    return rician_pdf(theta, dist) * theta / (2.0 * t_r);
}

double delay_cdf(double t_d, const TippingDistribution& dist, double t_r) {
    // P(T <= t_d) = P(theta >= theta(t_d)) = 1 - F_Theta(theta(t_d))
    return 1.0 - rician_cdf(theta_from_delay(t_d, t_r), dist);
}

std::pair<double, double> sample_tipping(const TippingDistribution& dist, Rng& rng) {
    dist.validate();
    const double tb = dist.width_theta;
    const double cx = dist.displacement_eta * tb;
    const double x = cx + tb * rng.normal();
    const double y = tb * rng.normal();
    const double theta = std::hypot(x, y);
    const double phi = math::wrap_angle(std::atan2(y, x) + dist.displacement_direction);
    return {theta, phi};
}

dynamics::SpinEnsembleState tipped_state(std::size_t n_bins, double p, double theta,
                                         double phi) {
    return dynamics::SpinEnsembleState::tipped(n_bins, p, theta, phi);
}

double displacement_from_photons(double n_trig, double kappa_cal) {
    if (n_trig < 0.0)
        throw std::invalid_argument("displacement_from_photons: n_trig must be >= 0");
    return kappa_cal * std::sqrt(n_trig);
}

double phase_coherence(const std::vector<double>& phases) {
    const std::size_t n = phases.size();
    if (n < 2)
        throw std::invalid_argument("phase_coherence: need at least 2 records");
    // sum over pairs via |sum e^{i phi}|^2 = n + 2 sum_{i<j} cos(phi_i - phi_j)
    double cr = 0.0, ci = 0.0;
    for (double phi : phases) {
        cr += std::cos(phi);
        ci += std::sin(phi);
    }
    const double total = cr * cr + ci * ci;
    return (total - static_cast<double>(n)) / (static_cast<double>(n) * (n - 1));
}

double phase_coherence(const ShotSet& set) {
    std::vector<double> phases;
    phases.reserve(set.records.size());
    for (const auto& r : set.records)
        phases.push_back(r.phase);
    return phase_coherence(phases);
}

ShotSet monte_carlo_bursts(const ensemble::SystemParams& params,
                           const ensemble::BinnedEnsemble& bins,
                           const TippingDistribution& dist, const MonteCarloConfig& config,
                           const std::optional<pulses::DriveWaveform>& trigger) {
    if (config.n_shots < 1)
        throw std::invalid_argument("monte_carlo_bursts: n_shots must be >= 1");
    dist.validate();

    const bool physical = trigger.has_value() && !trigger->empty();
    // physical path: displacement comes from the drive, sampling is thermal only
    TippingDistribution sample_dist = dist;
    if (physical)
        sample_dist.displacement_eta = 0.0;

    pulses::DriveWaveform drive;  // empty for the analytic path
    if (physical)
        drive = pulses::delayed(*trigger, config.trigger_delay);

    const auto n = static_cast<std::size_t>(config.n_shots);
    ShotSet out;
    out.displacement_eta = dist.displacement_eta;
    out.records.resize(n);
    out.thetas.resize(n);
    out.phis.resize(n);

    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    const auto worker = [&]() {
        for (;;) {
            const std::size_t shot = cursor.fetch_add(1);
            if (shot >= n || failed.load())
                return;
            try {
                Rng rng = Rng::for_shot(config.seed, shot);
                auto [theta, phi] = sample_tipping(sample_dist, rng);
                out.thetas[shot] = theta;
                out.phis[shot] = phi;
                double p = config.inversion;
                if (config.p_jitter > 0.0)
                    p *= 1.0 + config.p_jitter * rng.normal();
                const auto initial = tipped_state(bins.size(), p, theta, phi);
                const auto traj = dynamics::integrate(
                    params, bins, initial, {0.0, 0.0}, drive,
                    dynamics::DetuningSchedule::constant(0.0, 0.0, config.t_end), 0.0,
                    config.t_end, config.output_dt, config.integrator);
                const auto rec = dynamics::extract_burst(traj, config.t_min);
                if (!rec)
                    throw std::runtime_error("no burst found in trajectory");
                out.records[shot] = *rec;
            } catch (const std::exception& e) {
                const std::scoped_lock lock(failure_mutex);
                failed.store(true);
                if (failure.empty())
                    failure = "shot " + std::to_string(shot) + ": " + e.what();
            }
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_workers =
        std::min<std::size_t>(std::max(config.jobs, 1), std::min<std::size_t>(hw, n));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failed.load())
        throw std::runtime_error("monte_carlo_bursts aborted at " + failure);
    return out;
}

} // namespace srsim::stochastic
