#ifndef MASER_INTEGRATOR_HPP
#define MASER_INTEGRATOR_HPP

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <vector>

namespace maser::ode {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Autonomous system y' = f(y) with its Jacobian df/dy.
struct System
{
    std::function<void(const Vector& y, Vector& dydt)> rhs;
    std::function<void(const Vector& y, Matrix& jac)> jacobian;
    /// Optional: false rejects a trial step (the step size is then reduced).
    std::function<bool(const Vector& y)> admissible;
    /// Optional: applied to every accepted state; returns true if it changed y.
    std::function<bool(Vector& y)> repair;
};

struct Settings
{
    double rtol = 1e-8;
    /// Per-component absolute tolerance (size of y).
    Vector atol;
    /// 0 picks a starting step from the initial derivative.
    double initial_step = 0.0;
    double max_step = std::numeric_limits<double>::infinity();
    /// Steps shorter than this fraction of max(|t|, span) count as a collapse.
    double min_step_fraction = 1e-14;
    long max_steps = 5'000'000;
};

struct Stats
{
    long accepted = 0;
    long rejected = 0;
    long inadmissible = 0;
    long repaired = 0;
};

struct Solution
{
    std::vector<double> t;
    std::vector<Vector> y;
    Stats stats;
};

/**
 * Linearly implicit Rosenbrock 2(3) pair (Shampine-Reichelt ode23s) with
 * weighted RMS error control. L-stable, so suitable for rate systems whose
 * time constants span many decades. With the exact Jacobian every linear
 * invariant of f is conserved up to round-off.
 *
 * The solution is recorded at `sample_times` (strictly increasing, within
 * (t0, t1]); the integrator lands on each of them exactly. An empty list
 * records t1 only. Throws IntegrationError on step collapse or when the step
 * budget is exhausted.
 */
Solution integrate(const System& system, const Vector& y0, double t0, double t1,
                   const std::vector<double>& sample_times, const Settings& settings);

} // namespace maser::ode

#endif
