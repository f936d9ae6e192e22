#ifndef MASER_DYNAMICS_HPP
#define MASER_DYNAMICS_HPP

#include <maser/integrator.hpp>
#include <maser/resonator.hpp>
#include <maser/spins.hpp>

#include <array>
#include <limits>
#include <string>
#include <vector>

namespace maser {

/*
 * Level scheme: 1/4 = P1+ lower/upper (coupled to the resonator through
 * gamma_s), 2/5 = P1_0 (pumped through gamma_p), 3/6 = P1- merged with the
 * fast-relaxing spins (gamma63_eff). All rates in rad/s.
 */
struct RateSystemParams
{
    double gamma41 = 0.0;
    double gamma52 = 0.0;
    double gamma63_eff = 0.0;
    double gamma_cr = 0.0;
    /// Stimulated-emission rate per photon, 4 g0^2 / Gamma.
    double gamma_s = 0.0;
    double gamma_p = 0.0;
    double kappa_tot = 0.0;
    double n_tot = 0.0;

    /// Throws DomainError for a negative rate or non-positive n_tot.
    void validate() const;
};

/// Longitudinal and cross-relaxation rates, rad/s.
struct RelaxationRates
{
    double gamma41 = 0.0;
    double gamma52 = 0.0;
    double gamma63_eff = 0.0;
    double gamma_cr = 0.0;
};

/// gamma_s and kappa_tot taken from the resonator/ensemble, n_tot = 3 ensemble.n_total.
RateSystemParams make_rate_params(const ResonatorParams& resonator, const SpinEnsembleParams& ensemble,
                                  const RelaxationRates& rates, double gamma_p);

struct RateSystemState
{
    /// N1..N6 stored at indices 0..5.
    std::array<double, 6> N{};
    /// Intra-resonator photon number.
    double n = 0.0;

    /// N4 - N1 (positive = inverted P1+).
    double delta_n_p1plus() const { return N[3] - N[0]; }
    double manifold(int k) const { return N[static_cast<std::size_t>(k)] + N[static_cast<std::size_t>(k + 3)]; }

    /// Every manifold at n_tot/3, all in the lower level, no photons.
    static RateSystemState ground(double n_tot);
};

struct Derivatives
{
    std::array<double, 6> dN{};
    double dn = 0.0;
};

/// Right-hand sides of the seven rate equations, as printed.
Derivatives derivatives(const RateSystemState& state, const RateSystemParams& params);

/// 7x7 Jacobian d(dN1..dN6, dn)/d(N1..N6, n).
Eigen::Matrix<double, 7, 7> jacobian(const RateSystemState& state, const RateSystemParams& params);

/// Quasi-static photon number gamma_s N4 / (kappa_tot + gamma_s (N1 - N4)).
/// Throws ThresholdExceeded when the denominator is not positive.
double quasi_static_photons(const RateSystemState& state, const RateSystemParams& params);

struct IntegrateOptions
{
    double rtol = 1e-8;
    /// Absolute tolerance on populations, relative to n_tot.
    double atol_population = 1e-12;
    double atol_photons = 1e-6;
    /// Eliminate n adiabatically; requires kappa_tot >= 1e6 x every other rate.
    bool adiabatic = false;
    /// Output times in (0, t_span]; empty gives `samples` evenly spaced points.
    std::vector<double> sample_times;
    std::size_t samples = 200;
    double max_step = std::numeric_limits<double>::infinity();
};

struct TimeSeries
{
    std::vector<double> t;
    std::vector<RateSystemState> states;
    ode::Stats stats;
    /// Clamping of small negative populations, one line per event.
    std::vector<std::string> log;
};

/// Populations below this multiple of -n_tot reject a step.
inline constexpr double negative_population_tolerance = 1e-12;

/**
 * Integrates the rate system from `initial` over [0, t_span] seconds. The
 * first sample is the initial state at t = 0.
 */
TimeSeries integrate(const RateSystemState& initial, const RateSystemParams& params, double t_span,
                     const IntegrateOptions& options = {});

/// Smallest non-zero relaxation or pump rate (rad/s); sets the settling time.
double slowest_rate(const RateSystemParams& params);

/// Photon-decoupled inversion: the steady-state N4 - N1 with gamma_s n terms removed.
double unclamped_inversion(const RateSystemParams& params, const RateSystemState& initial_guess);

/**
 * Stationary point of the rate system with the manifold totals of
 * `initial_guess`. Integrates to ~60 slowest time constants and polishes by
 * Newton iteration. Throws ThresholdExceeded if the photon-decoupled
 * inversion reaches kappa_tot / gamma_s.
 */
RateSystemState steady_state(const RateSystemParams& params, const RateSystemState& initial_guess);

/// Pump rate gamma_p = g0^2 Gamma / ((w_p - w_s)^2 + Gamma^2/4) * n_in. `pumped` is the P1_0 line.
double pump_rate(double power_watts, const ResonatorParams& resonator, const SpinEnsembleParams& pumped,
                 double omega_p);

/// |delta_n_thr| = kappa_tot Gamma / (4 g0^2).
double oscillation_threshold(const ResonatorParams& resonator, const SpinEnsembleParams& ensemble);

/// 1 / rate.
double relaxation_time(double rate);

} // namespace maser

#endif
