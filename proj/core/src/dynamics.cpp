#include <maser/dynamics.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maser {

void RateSystemParams::validate() const
{
    const double rates[] = {gamma41, gamma52, gamma63_eff, gamma_cr, gamma_s, gamma_p, kappa_tot};
    for (double r : rates) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw DomainError("rate system: rates must be finite and non-negative");
        }
    }
    if (!(n_tot > 0.0) || !std::isfinite(n_tot)) {
        throw DomainError("rate system: n_tot must be positive");
    }
}

RateSystemParams make_rate_params(const ResonatorParams& resonator, const SpinEnsembleParams& ensemble,
                                  const RelaxationRates& rates, double gamma_p)
{
    RateSystemParams p;
    p.gamma41 = rates.gamma41;
    p.gamma52 = rates.gamma52;
    p.gamma63_eff = rates.gamma63_eff;
    p.gamma_cr = rates.gamma_cr;
    p.gamma_s = ensemble.stimulated_rate();
    p.gamma_p = gamma_p;
    p.kappa_tot = resonator.kappa_tot();
    p.n_tot = 3.0 * ensemble.n_total;
    p.validate();
    return p;
}

RateSystemState RateSystemState::ground(double n_tot)
{
    RateSystemState s;
    s.N = {n_tot / 3.0, n_tot / 3.0, n_tot / 3.0, 0.0, 0.0, 0.0};
    return s;
}

namespace {

double cross_relaxation(const std::array<double, 6>& N, const RateSystemParams& p)
{
    const double c = p.gamma_cr / (p.n_tot * p.n_tot * p.n_tot);
    return c * (N[1] * N[1] * N[3] * N[5] - N[4] * N[4] * N[0] * N[2]);
}

} // namespace

Derivatives derivatives(const RateSystemState& s, const RateSystemParams& p)
{
    const auto& N = s.N;
    const double c = cross_relaxation(N, p);
    const double stim = p.gamma_s * s.n * (N[0] - N[3]);
    Derivatives d;
    d.dN[0] = p.gamma41 * N[3] + c - stim;
    d.dN[1] = p.gamma52 * N[4] - 2.0 * c - p.gamma_p * (N[1] - N[4]);
    d.dN[2] = p.gamma63_eff * N[5] + c;
    d.dN[3] = -d.dN[0];
    d.dN[4] = -d.dN[1];
    d.dN[5] = -d.dN[2];
    d.dn = -p.kappa_tot * s.n - stim + p.gamma_s * N[3];
    return d;
}

Eigen::Matrix<double, 7, 7> jacobian(const RateSystemState& s, const RateSystemParams& p)
{
    const auto& N = s.N;
    const double c = p.gamma_cr / (p.n_tot * p.n_tot * p.n_tot);
    // Gradient of the cross-relaxation term.
    const double g[6] = {
        -c * N[4] * N[4] * N[2],
        c * 2.0 * N[1] * N[3] * N[5],
        -c * N[4] * N[4] * N[0],
        c * N[1] * N[1] * N[5],
        -c * 2.0 * N[4] * N[0] * N[2],
        c * N[1] * N[1] * N[3],
    };
    Eigen::Matrix<double, 7, 7> j = Eigen::Matrix<double, 7, 7>::Zero();
    for (int k = 0; k < 6; ++k) {
        j(0, k) = g[k];
        j(1, k) = -2.0 * g[k];
        j(2, k) = g[k];
    }
    j(0, 3) += p.gamma41;
    j(0, 0) -= p.gamma_s * s.n;
    j(0, 3) += p.gamma_s * s.n;
    j(0, 6) = -p.gamma_s * (N[0] - N[3]);
    j(1, 4) += p.gamma52;
    j(1, 1) -= p.gamma_p;
    j(1, 4) += p.gamma_p;
    j(2, 5) += p.gamma63_eff;
    for (int r = 0; r < 3; ++r) {
        j.row(r + 3) = -j.row(r);
    }
    j(6, 0) = -p.gamma_s * s.n;
    j(6, 3) = p.gamma_s * s.n + p.gamma_s;
    j(6, 6) = -p.kappa_tot - p.gamma_s * (N[0] - N[3]);
    return j;
}

double quasi_static_photons(const RateSystemState& s, const RateSystemParams& p)
{
    const double den = p.kappa_tot + p.gamma_s * (s.N[0] - s.N[3]);
    if (!(den > 0.0)) {
        throw ThresholdExceeded("quasi-static photon number diverges", s.delta_n_p1plus(),
                                p.gamma_s > 0.0 ? p.kappa_tot / p.gamma_s : 0.0);
    }
    return p.gamma_s * s.N[3] / den;
}

double slowest_rate(const RateSystemParams& p)
{
    double r = std::numeric_limits<double>::infinity();
    for (double v : {p.gamma41, p.gamma52, p.gamma63_eff, p.gamma_cr, p.gamma_p}) {
        if (v > 0.0) {
            r = std::min(r, v);
        }
    }
    return std::isfinite(r) ? r : 1.0;
}

namespace {

void check_adiabatic(const RateSystemParams& p)
{
    const double fastest =
        std::max({p.gamma41, p.gamma52, p.gamma63_eff, p.gamma_cr, p.gamma_p, p.gamma_s});
    if (!(p.kappa_tot >= 1e6 * fastest)) {
        throw DomainError("adiabatic elimination needs kappa_tot >= 1e6 x every other rate");
    }
}

RateSystemState unpack(const ode::Vector& y, const RateSystemParams& p, bool adiabatic)
{
    RateSystemState s;
    for (int k = 0; k < 6; ++k) {
        s.N[static_cast<std::size_t>(k)] = y[k];
    }
    if (adiabatic) {
        const double den = p.kappa_tot + p.gamma_s * (s.N[0] - s.N[3]);
        s.n = den > 0.0 ? p.gamma_s * s.N[3] / den : std::numeric_limits<double>::infinity();
    } else {
        s.n = y[6];
    }
    return s;
}

ode::System make_system(const RateSystemParams& p, bool adiabatic, std::vector<std::string>& log)
{
    const Eigen::Index dim = adiabatic ? 6 : 7;
    const double floor = -negative_population_tolerance * p.n_tot;
    ode::System sys;
    sys.rhs = [&p, adiabatic, dim](const ode::Vector& y, ode::Vector& f) {
        const Derivatives d = derivatives(unpack(y, p, adiabatic), p);
        for (int k = 0; k < 6; ++k) {
            f[k] = d.dN[static_cast<std::size_t>(k)];
        }
        if (dim == 7) {
            f[6] = d.dn;
        }
    };
    sys.jacobian = [&p, adiabatic](const ode::Vector& y, ode::Matrix& jac) {
        const RateSystemState s = unpack(y, p, adiabatic);
        const auto full = jacobian(s, p);
        if (!adiabatic) {
            jac = full;
            return;
        }
        const double den = p.kappa_tot + p.gamma_s * (s.N[0] - s.N[3]);
        double dn[6] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
        dn[0] = -p.gamma_s * s.n / den;
        dn[3] = p.gamma_s * (1.0 + s.n) / den;
        jac = full.topLeftCorner<6, 6>();
        for (int r = 0; r < 6; ++r) {
            for (int c = 0; c < 6; ++c) {
                jac(r, c) += full(r, 6) * dn[c];
            }
        }
    };
    sys.admissible = [&p, adiabatic, dim, floor](const ode::Vector& y) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            if (y[k] < floor) {
                return false;
            }
        }
        if (adiabatic && !(p.kappa_tot + p.gamma_s * (y[0] - y[3]) > 0.0)) {
            return false;
        }
        return true;
    };
    sys.repair = [dim, &log](ode::Vector& y) {
        bool changed = false;
        for (int k = 0; k < 6; ++k) {
            if (y[k] < 0.0) {
                const int partner = k < 3 ? k + 3 : k - 3;
                std::ostringstream msg;
                msg << "clamped N" << (k + 1) << " = " << y[k] << " to 0 (moved to N" << (partner + 1) << ")";
                log.push_back(msg.str());
                y[partner] += y[k];
                y[k] = 0.0;
                changed = true;
            }
        }
        if (dim == 7 && y[6] < 0.0) {
            std::ostringstream msg;
            msg << "clamped n = " << y[6] << " to 0";
            log.push_back(msg.str());
            y[6] = 0.0;
            changed = true;
        }
        return changed;
    };
    return sys;
}

} // namespace

TimeSeries integrate(const RateSystemState& initial, const RateSystemParams& params, double t_span,
                     const IntegrateOptions& options)
{
    params.validate();
    if (!(t_span > 0.0) || !std::isfinite(t_span)) {
        throw DomainError("integrate: t_span must be positive");
    }
    for (double v : initial.N) {
        if (!(v >= 0.0)) {
            throw DomainError("integrate: initial populations must be non-negative");
        }
    }
    if (!(initial.n >= 0.0)) {
        throw DomainError("integrate: initial photon number must be non-negative");
    }
    if (options.adiabatic) {
        check_adiabatic(params);
    }

    const bool adiabatic = options.adiabatic;
    const Eigen::Index dim = adiabatic ? 6 : 7;
    ode::Vector y0(dim);
    for (int k = 0; k < 6; ++k) {
        y0[k] = initial.N[static_cast<std::size_t>(k)];
    }
    if (!adiabatic) {
        y0[6] = initial.n;
    }

    std::vector<double> samples = options.sample_times;
    if (samples.empty()) {
        const std::size_t count = std::max<std::size_t>(options.samples, 1);
        for (std::size_t i = 1; i <= count; ++i) {
            samples.push_back(t_span * static_cast<double>(i) / static_cast<double>(count));
        }
        samples.back() = t_span;
    }

    TimeSeries out;
    ode::Settings settings;
    settings.rtol = options.rtol;
    settings.atol = ode::Vector::Constant(dim, options.atol_population * params.n_tot);
    if (!adiabatic) {
        settings.atol[6] = options.atol_photons;
    }
    settings.max_step = options.max_step;
    const ode::System sys = make_system(params, adiabatic, out.log);
    const ode::Solution sol = ode::integrate(sys, y0, 0.0, t_span, samples, settings);

    out.stats = sol.stats;
    out.t.reserve(sol.t.size() + 1);
    out.states.reserve(sol.t.size() + 1);
    out.t.push_back(0.0);
    out.states.push_back(adiabatic ? unpack(y0, params, true) : initial);
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        out.t.push_back(sol.t[i]);
        out.states.push_back(unpack(sol.y[i], params, adiabatic));
    }
    return out;
}

namespace {

// Newton iteration on f = 0 with the three N1..N3 rows replaced by the
// manifold totals, which makes the Jacobian non-singular.
RateSystemState polish(RateSystemState s, const RateSystemParams& p, const std::array<double, 3>& totals)
{
    const double scale = p.n_tot;
    for (int iter = 0; iter < 60; ++iter) {
        const Derivatives d = derivatives(s, p);
        const auto j = jacobian(s, p);
        Eigen::Matrix<double, 7, 7> a = j;
        Eigen::Matrix<double, 7, 1> r;
        for (int k = 0; k < 3; ++k) {
            a.row(k).setZero();
            a(k, k) = 1.0;
            a(k, k + 3) = 1.0;
            r[k] = s.N[static_cast<std::size_t>(k)] + s.N[static_cast<std::size_t>(k + 3)] -
                   totals[static_cast<std::size_t>(k)];
        }
        for (int k = 3; k < 6; ++k) {
            r[k] = d.dN[static_cast<std::size_t>(k)];
        }
        r[6] = d.dn;
        const Eigen::Matrix<double, 7, 1> delta = a.fullPivLu().solve(-r);
        if (!delta.allFinite()) {
            break;
        }
        double step_n = 0.0;
        for (int k = 0; k < 6; ++k) {
            s.N[static_cast<std::size_t>(k)] += delta[k];
            step_n = std::max(step_n, std::abs(delta[k]) / scale);
        }
        s.n += delta[6];
        const double step_photon = std::abs(delta[6]) / std::max(std::abs(s.n), 1.0);
        if (step_n < 1e-15 && step_photon < 1e-13) {
            return s;
        }
    }
    throw Error("steady_state: Newton polish did not converge");
}

RateSystemState settle(const RateSystemParams& p, const RateSystemState& guess)
{
    IntegrateOptions opt;
    opt.samples = 1;
    const double t_end = 60.0 / slowest_rate(p);
    const TimeSeries ts = integrate(guess, p, t_end, opt);
    const std::array<double, 3> totals = {guess.manifold(0), guess.manifold(1), guess.manifold(2)};
    RateSystemState s = polish(ts.states.back(), p, totals);
    for (double v : s.N) {
        if (v < -negative_population_tolerance * p.n_tot) {
            throw Error("steady_state: Newton polish left the physical domain");
        }
    }
    return s;
}

} // namespace

double unclamped_inversion(const RateSystemParams& params, const RateSystemState& initial_guess)
{
    RateSystemParams decoupled = params;
    decoupled.gamma_s = 0.0;
    RateSystemState guess = initial_guess;
    guess.n = 0.0;
    return settle(decoupled, guess).delta_n_p1plus();
}

RateSystemState steady_state(const RateSystemParams& params, const RateSystemState& initial_guess)
{
    params.validate();
    if (params.gamma_s > 0.0) {
        const double threshold = params.kappa_tot / params.gamma_s;
        const double free = unclamped_inversion(params, initial_guess);
        if (free >= threshold) {
            throw ThresholdExceeded("pump drives the inversion above the self-oscillation threshold",
                                    free, threshold);
        }
    }
    return settle(params, initial_guess);
}

double pump_rate(double power_watts, const ResonatorParams& resonator, const SpinEnsembleParams& pumped,
                 double omega_p)
{
    if (!(power_watts >= 0.0)) {
        throw DomainError("pump_rate: power must be non-negative");
    }
    resonator.validate();
    pumped.validate();
    const double det = omega_p - pumped.omega_s;
    const double stim = pumped.g0 * pumped.g0 * pumped.gamma /
                        (det * det + 0.25 * pumped.gamma * pumped.gamma);
    return stim * input_photon_flux(resonator, power_watts, omega_p);
}

double oscillation_threshold(const ResonatorParams& resonator, const SpinEnsembleParams& ensemble)
{
    if (!(ensemble.g0 > 0.0)) {
        throw DomainError("oscillation_threshold: g0 must be positive");
    }
    return resonator.kappa_tot() * ensemble.gamma / (4.0 * ensemble.g0 * ensemble.g0);
}

double relaxation_time(double rate)
{
    if (!(rate > 0.0)) {
        throw DomainError("relaxation_time: rate must be positive");
    }
    return 1.0 / rate;
}

} // namespace maser
