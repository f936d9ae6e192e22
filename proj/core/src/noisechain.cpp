#include <maser/noisechain.hpp>

#include <maser/errors.hpp>
#include <maser/units.hpp>

#include <cmath>

namespace maser::noise {

ChainComponent ChainComponent::from_loss_db(double loss_db, double t_phys, std::string label)
{
    if (!(loss_db >= 0.0) || !std::isfinite(loss_db)) {
        throw DomainError("chain component '" + label + "': loss must be non-negative dB");
    }
    ChainComponent c{db_to_ratio(-loss_db), t_phys, std::move(label)};
    c.validate();
    return c;
}

void ChainComponent::validate() const
{
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw DomainError("chain component '" + label + "': beta must lie in (0, 1]");
    }
    if (!(t_phys >= 0.0) || !std::isfinite(t_phys)) {
        throw DomainError("chain component '" + label + "': temperature must be non-negative");
    }
}

namespace {

double occupation(double t, double omega)
{
    return t > 0.0 ? thermal_photons(t, omega) : 0.0;
}

} // namespace

double propagate_occupation(double n_in, const Chain& chain, double omega)
{
    if (!(n_in >= 0.0)) {
        throw DomainError("propagate_occupation: occupation must be non-negative");
    }
    double n = n_in;
    for (const auto& c : chain) {
        c.validate();
        if (c.beta == 1.0) {
            continue;
        }
        n = c.beta * n + (1.0 - c.beta) * occupation(c.t_phys, omega);
    }
    return n;
}

double corrected_input_temperature(double t_source, const Chain& chain, double omega)
{
    if (!(t_source > 0.0)) {
        throw DomainError("corrected_input_temperature: source temperature must be positive");
    }
    bool lossless = true;
    for (const auto& c : chain) {
        c.validate();
        lossless = lossless && c.beta == 1.0;
    }
    if (lossless) {
        return t_source;
    }
    const double n = propagate_occupation(thermal_photons(t_source, omega), chain, omega);
    return n > 0.0 ? photons_to_temperature(n, omega) : 0.0;
}

void NoiseSweep::validate() const
{
    if (points.size() < 3) {
        throw DomainError("noise sweep needs at least three points");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (points[i].t_in == points[j].t_in) {
                throw DomainError("noise sweep: T_in values must be distinct");
            }
        }
    }
    if (!(bandwidth > 0.0)) {
        throw DomainError("noise sweep: bandwidth must be positive");
    }
}

SweepFit fit_noise_sweep(const NoiseSweep& sweep, double gain_product)
{
    if (sweep.points.size() >= 2) {
        bool all_equal = true;
        for (const auto& p : sweep.points) {
            all_equal = all_equal && p.t_in == sweep.points.front().t_in;
        }
        if (all_equal) {
            throw DomainError("noise sweep is rank-deficient: a single T_in value");
        }
    }
    sweep.validate();
    if (!(gain_product > 0.0)) {
        throw DomainError("fit_noise_sweep: gain product must be positive");
    }
    const auto m = static_cast<double>(sweep.points.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : sweep.points) {
        mx += p.t_in;
        my += p.p_out;
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : sweep.points) {
        sxx += (p.t_in - mx) * (p.t_in - mx);
        sxy += (p.t_in - mx) * (p.p_out - my);
    }
    SweepFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (const auto& p : sweep.points) {
        const double r = p.p_out - (f.intercept + f.slope * p.t_in);
        ssr += r * r;
    }
    f.residual_norm = ssr;
    const double s2 = ssr / (m - 2.0);
    const double var_slope = s2 / sxx;
    const double var_intercept = s2 * (1.0 / m + mx * mx / sxx);
    const double cov = -mx * s2 / sxx;
    f.slope_sigma = std::sqrt(var_slope);
    f.intercept_sigma = std::sqrt(var_intercept);
    if (f.slope == 0.0) {
        throw DomainError("fit_noise_sweep: zero slope, no temperature dependence");
    }
    // T_sys = b / a; first-order propagation with the a-b covariance.
    f.t_sys = std::abs(f.intercept / f.slope);
    const double da = -f.intercept / (f.slope * f.slope);
    const double db = 1.0 / f.slope;
    f.t_sys_sigma = std::sqrt(std::max(da * da * var_slope + db * db * var_intercept + 2.0 * da * db * cov, 0.0));
    f.gain = f.slope / (constants::k_b * sweep.bandwidth * gain_product);
    return f;
}

void AmplifierStage::validate() const
{
    if (!(gain > 0.0)) {
        throw DomainError("amplifier stage: gain must be positive");
    }
    if (!(t_noise >= 0.0)) {
        throw DomainError("amplifier stage: noise temperature must be non-negative");
    }
}

double cascade_noise(const std::vector<AmplifierStage>& stages)
{
    if (stages.empty()) {
        throw DomainError("cascade_noise: need at least one stage");
    }
    double t = 0.0;
    double g = 1.0;
    for (const auto& s : stages) {
        s.validate();
        t += s.t_noise / g;
        g *= s.gain;
    }
    return t;
}

MaserNoise maser_noise_from_system(double t_sys, double t_following, double g_maser)
{
    if (!(g_maser > 0.0)) {
        throw DomainError("maser_noise_from_system: gain must be positive");
    }
    MaserNoise out;
    out.t_maser = t_sys - t_following / g_maser;
    if (out.t_maser < 0.0) {
        out.warnings.emplace_back("over-subtraction: following-stage contribution exceeds T_sys");
    }
    return out;
}

} // namespace maser::noise
