#include <maser/resonator.hpp>

#include <maser/spins.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace maser {

ResonatorParams ResonatorParams::from_quality_factors(AngularRate omega_r, double q_ext, double q_int)
{
    if (!(q_ext > 0.0) || !(q_int > 0.0)) {
        throw DomainError("quality factors must be positive");
    }
    ResonatorParams p{omega_r.value, omega_r.value / q_ext,
                      std::isinf(q_int) ? 0.0 : omega_r.value / q_int};
    p.validate();
    return p;
}

double ResonatorParams::q_int() const
{
    return kappa_int > 0.0 ? omega_r / kappa_int : std::numeric_limits<double>::infinity();
}

void ResonatorParams::validate() const
{
    if (!(omega_r > 0.0) || !std::isfinite(omega_r)) {
        throw DomainError("resonator: omega_r must be positive");
    }
    if (!(kappa_ext > 0.0) || !std::isfinite(kappa_ext)) {
        throw DomainError("resonator: kappa_ext must be positive");
    }
    if (!(kappa_int >= 0.0) || !std::isfinite(kappa_int)) {
        throw DomainError("resonator: kappa_int must be non-negative");
    }
}

void ComplexSpectrum::validate() const
{
    if (frequencies.size() != values.size()) {
        throw DomainError("spectrum: frequency and value arrays differ in length");
    }
    for (std::size_t i = 1; i < frequencies.size(); ++i) {
        if (!(frequencies[i] > frequencies[i - 1])) {
            throw DomainError("spectrum: frequencies must be strictly increasing");
        }
    }
}

std::vector<double> linear_grid(double start, double stop, std::size_t count)
{
    if (count < 2 || !(stop > start)) {
        throw DomainError("linear_grid: need count >= 2 and stop > start");
    }
    std::vector<double> grid(count);
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = start + step * static_cast<double>(i);
    }
    grid.back() = stop;
    return grid;
}

complex reflection(const ResonatorParams& params, complex spin_function, double omega)
{
    const complex denom = complex(omega - params.omega_r, 0.5 * params.kappa_tot()) - spin_function;
    if (denom == complex(0.0, 0.0)) {
        throw SingularityError("reflection pole at omega = " + std::to_string(omega) + " rad/s", omega);
    }
    return complex(0.0, params.kappa_ext) / denom - 1.0;
}

double gain_peak(const ResonatorParams& params, double kappa_s)
{
    const double ks = std::abs(kappa_s);
    const double den = params.kappa_ext + params.kappa_int - ks;
    if (den == 0.0) {
        throw SingularityError("gain diverges: |kappa_s| equals kappa_tot", params.omega_r);
    }
    const double num = params.kappa_ext - params.kappa_int + ks;
    return (num * num) / (den * den);
}

double magnetic_q(const ResonatorParams& params, double kappa_s)
{
    if (!(kappa_s > 0.0)) {
        throw DomainError("magnetic_q: kappa_s must be positive");
    }
    return params.omega_r / kappa_s;
}

double gain_bandwidth_product(double peak_power_gain, double fwhm)
{
    if (!(peak_power_gain > 0.0)) {
        throw DomainError("gain_bandwidth_product: gain must be positive");
    }
    return std::sqrt(peak_power_gain) * fwhm;
}

namespace {

// Linear interpolation of the crossing of `level` between samples i and j.
double crossing(const std::vector<double>& x, const std::vector<double>& y, std::size_t i,
                std::size_t j, double level)
{
    const double t = (level - y[i]) / (y[j] - y[i]);
    return x[i] + t * (x[j] - x[i]);
}

} // namespace

GainSpectrum gain_spectrum(const ResonatorParams& params, const SpinEnsembleParams& ensemble,
                           double delta_n, const std::vector<double>& grid)
{
    params.validate();
    ensemble.validate();
    if (grid.size() < 2) {
        throw DomainError("gain_spectrum: grid needs at least two points");
    }
    GainSpectrum out;
    out.reflection.frequencies = grid;
    out.reflection.values.reserve(grid.size());
    out.power_gain_db.reserve(grid.size());
    for (double w : grid) {
        const complex k = spin_function(ensemble, delta_n, w);
        if (params.kappa_tot() - 2.0 * k.imag() <= 0.0) {
            throw SingularityError("self-oscillating: kappa_tot - Im 2K <= 0 at omega = " +
                                       std::to_string(w) + " rad/s",
                                   w);
        }
        const complex r = reflection(params, k, w);
        out.reflection.values.push_back(r);
        out.power_gain_db.push_back(10.0 * std::log10(std::norm(r)));
    }
    out.reflection.validate();

    const auto& db = out.power_gain_db;
    const auto peak_it = std::max_element(db.begin(), db.end());
    const std::size_t ipk = static_cast<std::size_t>(peak_it - db.begin());
    out.peak_gain_db = *peak_it;
    out.peak_omega = grid[ipk];
    out.baseline_db = 0.5 * (db.front() + db.back());

    const double half = out.peak_gain_db - 10.0 * std::log10(2.0);
    if (ipk == 0 || ipk + 1 == grid.size()) {
        return out;
    }
    std::size_t lo = ipk;
    while (lo > 0 && db[lo] > half) {
        --lo;
    }
    std::size_t hi = ipk;
    while (hi + 1 < db.size() && db[hi] > half) {
        ++hi;
    }
    if (db[lo] > half || db[hi] > half) {
        return out;
    }
    const double left = crossing(grid, db, lo, lo + 1, half);
    const double right = crossing(grid, db, hi - 1, hi, half);
    out.fwhm = right - left;
    out.gain_bandwidth = gain_bandwidth_product(std::pow(10.0, out.peak_gain_db / 10.0), *out.fwhm);
    return out;
}

double input_photon_flux(const ResonatorParams& params, double power_watts, double omega_p)
{
    if (!(power_watts >= 0.0)) {
        throw DomainError("input_photon_flux: power must be non-negative");
    }
    if (!(omega_p > 0.0)) {
        throw DomainError("input_photon_flux: omega_p must be positive");
    }
    const double kt = params.kappa_tot();
    const double det = omega_p - params.omega_r;
    return 4.0 * params.kappa_ext / (kt * kt + 4.0 * det * det) * power_watts /
           (constants::hbar * omega_p);
}

complex ResonatorFit::model(double omega) const
{
    const complex background =
        amplitude * std::exp(complex(0.0, -(phase + delay * (omega - omega_ref))));
    return background * reflection(params, 0.0, omega);
}

namespace {

struct CircleFit
{
    complex center;
    double radius = 0.0;
};

// Algebraic (Kasa) circle fit: minimises sum (x^2 + y^2 + D x + E y + F)^2.
CircleFit fit_circle(const std::vector<complex>& z)
{
    const auto m = static_cast<Eigen::Index>(z.size());
    Eigen::MatrixXd a(m, 3);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const complex v = z[static_cast<std::size_t>(i)];
        a(i, 0) = v.real();
        a(i, 1) = v.imag();
        a(i, 2) = 1.0;
        b[i] = -std::norm(v);
    }
    const Eigen::Vector3d s = a.colPivHouseholderQr().solve(b);
    CircleFit c;
    c.center = complex(-0.5 * s[0], -0.5 * s[1]);
    c.radius = std::sqrt(std::max(std::norm(c.center) - s[2], 0.0));
    return c;
}

} // namespace

ResonatorFit fit_bare_resonator(const ComplexSpectrum& spectrum)
{
    spectrum.validate();
    const std::size_t m = spectrum.size();
    if (m < 8) {
        throw DomainError("fit_bare_resonator: need at least 8 samples");
    }
    const auto& w = spectrum.frequencies;
    const auto& z = spectrum.values;
    const double w_c = 0.5 * (w.front() + w.back());
    const double s = 0.5 * (w.back() - w.front());

    // Seeds from the resonance circle. The angle about the centre swings by up
    // to 2 pi across the line; its midpoint crossing marks resonance and the
    // crossings at +-pi/2 from it sit half a linewidth either side.
    const CircleFit circle = fit_circle(z);
    std::vector<double> angle(m);
    for (std::size_t i = 0; i < m; ++i) {
        angle[i] = std::arg(z[i] - circle.center);
        if (i > 0) {
            while (angle[i] - angle[i - 1] > constants::pi) {
                angle[i] -= constants::two_pi;
            }
            while (angle[i] - angle[i - 1] < -constants::pi) {
                angle[i] += constants::two_pi;
            }
        }
    }
    const double swing = angle.back() - angle.front();
    const double dir = swing >= 0.0 ? 1.0 : -1.0;
    const double mid = 0.5 * (angle.front() + angle.back());
    auto first_above = [&](double level) {
        for (std::size_t i = 0; i < m; ++i) {
            if (dir * (angle[i] - mid) >= level) {
                return i;
            }
        }
        return m - 1;
    };
    std::size_t ires = std::clamp<std::size_t>(first_above(0.0), 1, m - 2);
    double kt0 = w[first_above(0.5 * constants::pi)] - w[first_above(-0.5 * constants::pi)];
    if (std::abs(swing) < constants::pi || !(kt0 > 0.0)) {
        // Line barely covered: fall back to the fastest angular motion.
        double speed = 0.0;
        for (std::size_t i = 1; i + 1 < m; ++i) {
            const double v = std::abs((angle[i + 1] - angle[i - 1]) / (w[i + 1] - w[i - 1]));
            if (v > speed) {
                speed = v;
                ires = i;
            }
        }
        kt0 = speed > 0.0 ? 4.0 / speed : s;
    }
    const complex off = 2.0 * circle.center - z[ires];
    const double amp0 = std::max(std::abs(off), 1e-12);
    const double phase0 = -std::arg(-off);
    const double ke0 = std::clamp(circle.radius * kt0 / amp0, 1e-3 * kt0, kt0);
    const double ki0 = std::max(kt0 - ke0, 0.0);

    std::vector<fit::Parameter> pars = {
        {"omega_r", "rad/s", (w[ires] - w_c) / s, -1.0, 1.0},
        {"kappa_ext", "rad/s", ke0 / s, 1e-12, fit::unbounded},
        {"kappa_int", "rad/s", ki0 / s, 0.0, fit::unbounded},
        {"amplitude", "", amp0, 1e-12, fit::unbounded},
        {"phase", "rad", phase0, -fit::unbounded, fit::unbounded},
        {"delay", "s", 0.0, -fit::unbounded, fit::unbounded},
    };
    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i) {
        x[i] = (w[i] - w_c) / s;
    }
    fit::Problem problem;
    problem.parameters = pars;
    problem.residual_count = 2 * m;
    problem.residuals = [&](std::span<const double> p, std::span<double> r) {
        const complex bg0 = p[3] * std::exp(complex(0.0, -p[4]));
        for (std::size_t i = 0; i < m; ++i) {
            const complex bare =
                complex(0.0, p[1]) / complex(x[i] - p[0], 0.5 * (p[1] + p[2])) - 1.0;
            const complex v = bg0 * std::exp(complex(0.0, -p[5] * x[i])) * bare - z[i];
            r[2 * i] = v.real();
            r[2 * i + 1] = v.imag();
        }
    };

    fit::FitResult result = fit::least_squares(problem);
    fit::apply_affine(result, {s, s, s, 1.0, 1.0, 1.0 / s}, {w_c, 0.0, 0.0, 0.0, 0.0, 0.0});
    if (!result.converged) {
        throw fit::FitError("fit_bare_resonator did not converge", std::move(result));
    }

    ResonatorFit out;
    out.params = {result.value("omega_r"), result.value("kappa_ext"), result.value("kappa_int")};
    out.amplitude = result.value("amplitude");
    out.phase = std::remainder(result.value("phase"), constants::two_pi);
    out.delay = result.value("delay");
    out.omega_ref = w_c;
    out.diagnostics = std::move(result);
    return out;
}

} // namespace maser
