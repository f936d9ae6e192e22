#ifndef MASER_RESONATOR_HPP
#define MASER_RESONATOR_HPP

#include <maser/fitting.hpp>
#include <maser/units.hpp>

#include <complex>
#include <optional>
#include <vector>

namespace maser {

using complex = std::complex<double>;

struct SpinEnsembleParams;

/// Single-port resonator. All rates angular (rad/s).
struct ResonatorParams
{
    double omega_r = 0.0;
    double kappa_ext = 0.0;
    double kappa_int = 0.0;

    static ResonatorParams from_quality_factors(AngularRate omega_r, double q_ext, double q_int);

    double kappa_tot() const { return kappa_ext + kappa_int; }
    double q_ext() const { return omega_r / kappa_ext; }
    /// Infinite for a lossless resonator.
    double q_int() const;

    /// Throws DomainError unless omega_r > 0, kappa_ext > 0, kappa_int >= 0.
    void validate() const;
};

/// Complex samples on a strictly increasing angular-frequency grid.
struct ComplexSpectrum
{
    std::vector<double> frequencies;
    std::vector<complex> values;

    std::size_t size() const { return frequencies.size(); }
    /// Throws DomainError on length mismatch or a non-increasing grid.
    void validate() const;
};

/// `count` evenly spaced angular frequencies from `start` to `stop` inclusive.
std::vector<double> linear_grid(double start, double stop, std::size_t count);

/**
 * Reflection amplitude r = i k_ext / ((w - w_r) + i k_tot/2 - K) - 1.
 *
 * K is the spin function in rad/s; K = 0 gives the bare resonator. A
 * vanishing denominator throws SingularityError carrying omega.
 */
complex reflection(const ResonatorParams& params, complex spin_function, double omega);

/// Peak power gain (k_ext - k_int + |k_s|)^2 / (k_ext + k_int - |k_s|)^2 at w = w_r = w_s.
double gain_peak(const ResonatorParams& params, double kappa_s);

/// Q_mag = w_r / k_s.
double magnetic_q(const ResonatorParams& params, double kappa_s);

/// sqrt(G) * FWHM; same unit as `fwhm`.
double gain_bandwidth_product(double peak_power_gain, double fwhm);

struct GainSpectrum
{
    ComplexSpectrum reflection;
    /// |r|^2 in dB on the same grid.
    std::vector<double> power_gain_db;
    double peak_gain_db = 0.0;
    double peak_omega = 0.0;
    /// Mean |r|^2 (dB) at the two grid ends.
    double baseline_db = 0.0;
    /// Full width between the half-power points around the peak (rad/s);
    /// empty when either point lies outside the grid or the peak sits on an edge.
    std::optional<double> fwhm;
    /// sqrt(G_peak) * FWHM (rad/s); present whenever fwhm is.
    std::optional<double> gain_bandwidth;
};

/**
 * Reflection spectrum of the resonator loaded with a Lorentzian spin
 * ensemble of population difference delta_n (N_u - N_l, positive = inverted).
 *
 * Throws SingularityError when k_tot - Im 2K(w) <= 0 at any grid point,
 * i.e. the configuration is self-oscillating.
 */
GainSpectrum gain_spectrum(const ResonatorParams& params, const SpinEnsembleParams& ensemble,
                           double delta_n, const std::vector<double>& grid);

/// Drive photon number n_in = 4 k_ext / (k_tot^2 + 4 (w_p - w_r)^2) * P / (hbar w_p).
double input_photon_flux(const ResonatorParams& params, double power_watts, double omega_p);

struct ResonatorFit
{
    ResonatorParams params;
    /// Background amplitude scale.
    double amplitude = 1.0;
    /// Background phase at the grid centre (rad).
    double phase = 0.0;
    /// Cable delay (s); the background is amplitude * exp(-i (phase + delay (w - w_c))).
    double delay = 0.0;
    /// Centre of the grid used as the phase reference.
    double omega_ref = 0.0;
    fit::FitResult diagnostics;

    /// Model value, background included.
    complex model(double omega) const;
};

/**
 * Complex least-squares fit of the bare-resonator reflection including a
 * linear-phase background. Throws fit::FitError (best-so-far parameters
 * attached) if the fit does not converge.
 */
ResonatorFit fit_bare_resonator(const ComplexSpectrum& spectrum);

} // namespace maser

#endif
