#include <maser/spins.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace maser {

double SpinEnsembleParams::ensemble_coupling() const
{
    return g0 * std::sqrt(n_total);
}

void SpinEnsembleParams::validate() const
{
    if (!(g0 > 0.0) || !std::isfinite(g0)) {
        throw DomainError("ensemble: g0 must be positive");
    }
    if (!(n_total > 0.0) || !std::isfinite(n_total)) {
        throw DomainError("ensemble: n_total must be positive");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw DomainError("ensemble: gamma must be positive");
    }
    if (!std::isfinite(omega_s)) {
        throw DomainError("ensemble: omega_s must be finite");
    }
}

void ModeGeometry::validate() const
{
    if (!(v_eff > 0.0) || !std::isfinite(v_eff)) {
        throw DomainError("geometry: v_eff must be positive");
    }
    // 0 is admitted so that a forbidden transition gives g0 = 0.
    if (!(matrix_element >= 0.0 && matrix_element <= 1.0)) {
        throw DomainError("geometry: matrix_element must lie in [0, 1]");
    }
}

double vacuum_field(const ModeGeometry& geometry, double omega_r)
{
    geometry.validate();
    if (!(omega_r > 0.0)) {
        throw DomainError("vacuum_field: omega_r must be positive");
    }
    return std::sqrt(constants::mu0 * constants::hbar * omega_r / (2.0 * geometry.v_eff));
}

double single_spin_coupling(const ModeGeometry& geometry, double omega_r)
{
    return constants::gamma_e * vacuum_field(geometry, omega_r) * geometry.matrix_element;
}

complex spin_function(const SpinEnsembleParams& ensemble, double delta_n, double omega)
{
    const double g2 = ensemble.g0 * ensemble.g0;
    return -g2 * delta_n / complex(omega - ensemble.omega_s, 0.5 * ensemble.gamma);
}

double spin_transition_rate(const SpinEnsembleParams& ensemble, double delta_n)
{
    return 4.0 * ensemble.g0 * ensemble.g0 * delta_n / ensemble.gamma;
}

ComplexSpectrum k_from_reflection(const ResonatorParams& params, const ComplexSpectrum& reflection)
{
    params.validate();
    reflection.validate();
    ComplexSpectrum out;
    out.frequencies = reflection.frequencies;
    out.values.reserve(reflection.size());
    for (std::size_t i = 0; i < reflection.size(); ++i) {
        const double w = reflection.frequencies[i];
        const complex r = reflection.values[i];
        const complex rp1 = r + 1.0;
        if (rp1 == complex(0.0, 0.0)) {
            throw SingularityError("r = -1 at omega = " + std::to_string(w) + " rad/s", w);
        }
        out.values.push_back(complex(w - params.omega_r, 0.0) +
                             complex(0.0, 0.5) * (params.kappa_int + params.kappa_ext * (r - 1.0) / rp1));
    }
    return out;
}

namespace {

double lorentzian(double x, double a, double x0, double b)
{
    const double d = x - x0;
    return a / (d * d + b * b);
}

// Half width at half maximum of |y - base| around index i, in units of x.
double half_width_estimate(const std::vector<double>& x, const std::vector<double>& y, std::size_t i)
{
    const double half = 0.5 * std::abs(y[i]);
    std::size_t lo = i;
    while (lo > 0 && std::abs(y[lo]) > half) {
        --lo;
    }
    std::size_t hi = i;
    while (hi + 1 < y.size() && std::abs(y[hi]) > half) {
        ++hi;
    }
    const double width = 0.5 * (x[hi] - x[lo]);
    const double spacing = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    return std::max(width, spacing);
}

} // namespace

DeltaNExtraction extract_delta_n(const ComplexSpectrum& k_spectrum, double g0, LineModel model,
                                 const ExtractOptions& options)
{
    k_spectrum.validate();
    if (!(g0 > 0.0)) {
        throw DomainError("extract_delta_n: g0 must be positive");
    }
    const std::size_t m = k_spectrum.size();
    const std::size_t n_par = model == LineModel::one_lorentzian ? 4 : 7;
    if (m < n_par + 1) {
        throw DomainError("extract_delta_n: too few samples for the line model");
    }

    DeltaNExtraction out;
    out.model = model;
    out.state.n_manifold = options.n_manifold;

    const auto& w = k_spectrum.frequencies;
    std::vector<double> y(m);
    double y_max = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        y[i] = k_spectrum.values[i].imag();
        y_max = std::max(y_max, std::abs(y[i]));
    }
    if (y_max < options.degenerate_level) {
        out.degenerate = true;
        out.warnings.emplace_back("degenerate fit: Im K is below the detection level; delta_n set to 0");
        return out;
    }

    const double w_c = 0.5 * (w.front() + w.back());
    const double s = 0.5 * (w.back() - w.front());
    std::vector<double> x(m);
    std::vector<double> yn(m);
    for (std::size_t i = 0; i < m; ++i) {
        x[i] = (w[i] - w_c) / s;
        yn[i] = y[i] / y_max;
    }

    const auto i_max = static_cast<std::size_t>(std::max_element(yn.begin(), yn.end()) - yn.begin());
    const auto i_min = static_cast<std::size_t>(std::min_element(yn.begin(), yn.end()) - yn.begin());
    const double b_floor = 1e-6;

    fit::Problem problem;
    problem.residual_count = m;
    const double a_scale = y_max * s * s;

    if (model == LineModel::one_lorentzian) {
        const std::size_t ipk = std::abs(yn[i_max]) >= std::abs(yn[i_min]) ? i_max : i_min;
        const double b0 = options.half_width_seed ? *options.half_width_seed / s
                                                  : half_width_estimate(x, yn, ipk);
        problem.parameters = {
            {"offset", "rad/s", 0.0, -fit::unbounded, fit::unbounded},
            {"amplitude", "(rad/s)^3", yn[ipk] * b0 * b0, -fit::unbounded, fit::unbounded},
            {"center", "rad/s", x[ipk], -fit::unbounded, fit::unbounded},
            {"half_width", "rad/s", std::max(b0, b_floor), b_floor, fit::unbounded},
        };
        problem.residuals = [&](std::span<const double> p, std::span<double> r) {
            for (std::size_t i = 0; i < m; ++i) {
                r[i] = p[0] + lorentzian(x[i], p[1], p[2], p[3]) - yn[i];
            }
        };
    } else {
        const double b1 = options.half_width_seed ? *options.half_width_seed / s
                                                  : half_width_estimate(x, yn, i_max);
        const double b2 = options.half_width_seed ? *options.half_width_seed / s
                                                  : half_width_estimate(x, yn, i_min);
        const double a1 = std::max(yn[i_max], 1e-3) * b1 * b1;
        const double a2 = std::min(yn[i_min], -1e-3) * b2 * b2;
        problem.parameters = {
            {"offset", "rad/s", 0.0, -fit::unbounded, fit::unbounded},
            {"amplitude_inverted", "(rad/s)^3", a1, 0.0, fit::unbounded},
            {"center_inverted", "rad/s", x[i_max], -fit::unbounded, fit::unbounded},
            {"half_width_inverted", "rad/s", std::max(b1, b_floor), b_floor, fit::unbounded},
            {"amplitude_absorbing", "(rad/s)^3", a2, -fit::unbounded, 0.0},
            {"center_absorbing", "rad/s", x[i_min], -fit::unbounded, fit::unbounded},
            {"half_width_absorbing", "rad/s", std::max(b2, b_floor), b_floor, fit::unbounded},
        };
        problem.residuals = [&](std::span<const double> p, std::span<double> r) {
            for (std::size_t i = 0; i < m; ++i) {
                r[i] = p[0] + lorentzian(x[i], p[1], p[2], p[3]) + lorentzian(x[i], p[4], p[5], p[6]) -
                       yn[i];
            }
        };
    }

    fit::FitResult result = fit::least_squares(problem);
    if (model == LineModel::one_lorentzian) {
        fit::apply_affine(result, {y_max, a_scale, s, s}, {0.0, 0.0, w_c, 0.0});
    } else {
        fit::apply_affine(result, {y_max, a_scale, s, s, a_scale, s, s},
                          {0.0, 0.0, w_c, 0.0, 0.0, w_c, 0.0});
    }
    // Normalised residuals are reported in rad/s^2 units of Im K.
    result.residual_norm *= y_max * y_max;
    if (!result.converged) {
        throw fit::FitError("delta_n extraction did not converge", std::move(result));
    }

    const auto values = result.values();
    out.offset = values[0];
    const double g2 = g0 * g0;
    for (std::size_t k = 1; k + 2 < values.size(); k += 3) {
        LorentzianComponent c;
        c.amplitude = values[k];
        c.center = values[k + 1];
        c.half_width = values[k + 2];
        if (!(c.half_width > 0.0)) {
            throw DomainError("extract_delta_n: fitted width is not positive");
        }
        c.delta_n = c.amplitude / (g2 * c.half_width);
        out.components.push_back(c);
        out.state.delta_n += c.delta_n;
    }

    // Re K implied by the fitted lobes: -(A/B) (w - w0) / ((w - w0)^2 + B^2).
    double peak = 0.0;
    std::vector<double> mismatch(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double re = 0.0;
        double im = out.offset;
        for (const auto& c : out.components) {
            const double d = w[i] - c.center;
            const double den = d * d + c.half_width * c.half_width;
            re -= c.amplitude / c.half_width * d / den;
            im += c.amplitude / den;
        }
        peak = std::max(peak, std::abs(im));
        mismatch[i] = k_spectrum.values[i].real() - re;
        mean += mismatch[i];
    }
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : mismatch) {
        ss += (v - mean) * (v - mean);
    }
    out.re_consistency = peak > 0.0 ? std::sqrt(ss / static_cast<double>(m)) / peak : 0.0;
    for (const auto& wmsg : result.warnings) {
        out.warnings.push_back(wmsg);
    }
    out.diagnostics = std::move(result);
    return out;
}

SpinTemperature inversion_to_spin_temperature(double rho, double omega)
{
    if (!(rho > 0.0 && rho <= 1.0)) {
        throw DomainError("inversion ratio must lie in (0, 1]");
    }
    if (!(omega > 0.0)) {
        throw DomainError("omega must be positive");
    }
    SpinTemperature t;
    if (rho == 1.0) {
        return t;
    }
    t.magnitude = photon_temperature(omega) / (2.0 * std::atanh(rho));
    // 1/(exp(2 atanh rho) - 1) simplifies to (1 - rho) / (2 rho).
    t.noise_photons = (1.0 - rho) / (2.0 * rho);
    return t;
}

} // namespace maser
