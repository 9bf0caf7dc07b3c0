// ode.hpp — adaptive Dormand-Prince 5(4) integrator
//
// Explicit embedded Runge-Kutta pair with PI step-size control and the
// classic 4th-order dense output, operating on a flat real state vector
// (complex components are stored as interleaved re/im by the caller).
// The burst dynamics spans four orders of magnitude in timescale, which
// is what the adaptivity is for.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace srsim::ode {

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 0.0;       // 0 = unlimited
    double initial_step = 0.0;   // 0 = automatic
    std::uint64_t max_steps = 50'000'000;
};

// dydt = f(t, y)
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

// Called after every accepted step with a dense-output evaluator valid on
// [t_prev, t]; `eval(s, out)` fills the interpolated state at time s.
using DenseCallback =
    std::function<void(double t_prev, double t,
                       const std::function<void(double, std::span<double>)>& eval)>;

// Integrate from t0 to t1 in place. Throws StiffnessError (naming the
// failure time) when the step size underflows or the step budget runs out.
void integrate_adaptive(const Rhs& rhs, std::vector<double>& y, double t0, double t1,
                        const Options& options, const DenseCallback& on_step = nullptr);

// Convenience wrapper: sample the solution on a uniform grid
// t0, t0+dt, ..., collecting rows through `emit(t, y_at_t)`.
void integrate_sampled(const Rhs& rhs, std::vector<double>& y, double t0, double t1,
                       double output_dt, const Options& options,
                       const std::function<void(double, std::span<const double>)>& emit);

} // namespace srsim::ode
