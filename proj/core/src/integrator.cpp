#include <maser/integrator.hpp>

#include <maser/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace maser::ode {

namespace {

constexpr double d_coef = 1.0 / (2.0 + 1.4142135623730951);
constexpr double e32 = 6.0 + 1.4142135623730951;

double error_norm(const Vector& err, const Vector& y, const Vector& y_new, double rtol,
                  const Vector& atol)
{
    double sum = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = atol[i] + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        const double e = err[i] / sc;
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

} // namespace

Solution integrate(const System& system, const Vector& y0, double t0, double t1,
                   const std::vector<double>& sample_times, const Settings& settings)
{
    const Eigen::Index dim = y0.size();
    if (!(t1 > t0)) {
        throw DomainError("integrate: t1 must exceed t0");
    }
    if (settings.atol.size() != dim) {
        throw DomainError("integrate: atol size does not match the state");
    }
    std::vector<double> samples = sample_times;
    if (samples.empty()) {
        samples.push_back(t1);
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i] > t0) || samples[i] > t1 || (i > 0 && !(samples[i] > samples[i - 1]))) {
            throw DomainError("integrate: sample times must be increasing within (t0, t1]");
        }
    }

    Solution sol;
    sol.t.reserve(samples.size());
    sol.y.reserve(samples.size());

    Vector y = y0;
    Vector f0(dim);
    system.rhs(y, f0);
    Matrix jac(dim, dim);
    const Matrix eye = Matrix::Identity(dim, dim);

    const double span = t1 - t0;
    double h = settings.initial_step;
    if (h <= 0.0) {
        double rate = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double sc = settings.atol[i] + settings.rtol * std::abs(y[i]);
            rate = std::max(rate, std::abs(f0[i]) / sc);
        }
        h = rate > 0.0 ? 0.01 * std::cbrt(settings.rtol) / rate : span;
        h = std::max(h, 1e-10 * span);
    }
    h = std::min({h, settings.max_step, span});

    double t = t0;
    std::size_t next = 0;
    bool have_jac = false;
    while (next < samples.size()) {
        if (sol.stats.accepted + sol.stats.rejected >= settings.max_steps) {
            throw IntegrationError("integrate: step budget exhausted", t, h);
        }
        const double h_min = settings.min_step_fraction * std::max(std::abs(t), span);
        if (h < h_min) {
            throw IntegrationError("integrate: step size collapsed (stiffness or inadmissible states)",
                                   t, h);
        }
        const double target = samples[next];
        bool lands = false;
        double h_try = h;
        if (t + h_try >= target || target - (t + h_try) < 1e-12 * span) {
            h_try = target - t;
            lands = true;
        }

        if (!have_jac) {
            system.jacobian(y, jac);
            have_jac = true;
        }
        const Eigen::PartialPivLU<Matrix> w(eye - (h_try * d_coef) * jac);
        const Vector k1 = w.solve(f0);
        Vector f1(dim);
        system.rhs(y + 0.5 * h_try * k1, f1);
        const Vector k2 = w.solve(f1 - k1) + k1;
        Vector y_new = y + h_try * k2;
        Vector f2(dim);
        system.rhs(y_new, f2);
        const Vector k3 = w.solve(f2 - e32 * (k2 - f1) - 2.0 * (k1 - f0));
        const Vector err = (h_try / 6.0) * (k1 - 2.0 * k2 + k3);
        double en = error_norm(err, y, y_new, settings.rtol, settings.atol);
        if (!std::isfinite(en) || !y_new.allFinite()) {
            en = std::numeric_limits<double>::infinity();
        }

        if (en > 1.0) {
            ++sol.stats.rejected;
            const double factor = std::isfinite(en) ? std::max(0.2, 0.8 * std::pow(en, -1.0 / 3.0)) : 0.2;
            h = h_try * factor;
            continue;
        }
        if (system.admissible && !system.admissible(y_new)) {
            ++sol.stats.inadmissible;
            h = 0.5 * h_try;
            continue;
        }

        ++sol.stats.accepted;
        if (system.repair && system.repair(y_new)) {
            ++sol.stats.repaired;
            system.rhs(y_new, f2);
        }
        t = lands ? target : t + h_try;
        y = y_new;
        f0 = f2;
        have_jac = false;
        if (lands) {
            sol.t.push_back(t);
            sol.y.push_back(y);
            ++next;
        }
        const double grow = en > 0.0 ? std::min(5.0, 0.8 * std::pow(en, -1.0 / 3.0)) : 5.0;
        // A step shortened only to hit a sample keeps the previous proposal.
        h = std::min(settings.max_step, lands ? std::max(h, h_try * grow) : h_try * grow);
    }
    return sol;
}

} // namespace maser::ode
