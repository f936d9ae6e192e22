#ifndef MASER_SPINS_HPP
#define MASER_SPINS_HPP

#include <maser/fitting.hpp>
#include <maser/resonator.hpp>

#include <optional>
#include <string>
#include <vector>

namespace maser {

/*
 * Sign convention used throughout: delta_n = N_upper - N_lower, so a
 * positive value means an inverted transition. With this convention
 *
 *     K(w) = -g0^2 delta_n / ((w - w_s) + i Gamma/2)
 *
 * and Im K > 0 at line centre for an inverted (emitting) ensemble.
 */

/// Lorentzian spin ensemble coupled to the resonator. Rates in rad/s.
struct SpinEnsembleParams
{
    double g0 = 0.0;
    /// Spins in the coupled transition.
    double n_total = 0.0;
    double omega_s = 0.0;
    /// Full width at half maximum of the inhomogeneous line.
    double gamma = 0.0;

    double ensemble_coupling() const;
    /// Stimulated-emission rate per photon, 4 g0^2 / Gamma.
    double stimulated_rate() const { return 4.0 * g0 * g0 / gamma; }
    void validate() const;
};

struct ModeGeometry
{
    /// Effective magnetic mode volume (m^3).
    double v_eff = 0.0;
    /// |<-1/2|S|+1/2>|, 1/2 for a transverse spin-1/2 transition.
    double matrix_element = 0.5;

    void validate() const;
};

struct InversionState
{
    double delta_n = 0.0;
    double n_manifold = 0.0;

    double inversion_ratio() const { return delta_n / n_manifold; }
};

/// Vacuum magnetic fluctuation dB0 = sqrt(mu0 hbar w_r / (2 V_eff)) in tesla.
double vacuum_field(const ModeGeometry& geometry, double omega_r);

/// g0 = gamma_e dB0 |<-1/2|S|+1/2>| in rad/s.
double single_spin_coupling(const ModeGeometry& geometry, double omega_r);

/// Spin function K(w) in rad/s (see the sign convention above).
complex spin_function(const SpinEnsembleParams& ensemble, double delta_n, double omega);

/// Signed spin transition rate Im 2K(w_s) = 4 g0^2 delta_n / Gamma.
double spin_transition_rate(const SpinEnsembleParams& ensemble, double delta_n);

/// Pointwise inversion of the reflection formula. Throws SingularityError at r = -1.
ComplexSpectrum k_from_reflection(const ResonatorParams& params, const ComplexSpectrum& reflection);

enum class LineModel
{
    one_lorentzian,
    two_lorentzian,
};

struct LorentzianComponent
{
    double amplitude = 0.0;  // A in y = A / ((x - x0)^2 + B^2), (rad/s)^3
    double center = 0.0;     // x0, rad/s
    double half_width = 0.0; // B, rad/s
    double delta_n = 0.0;    // signed contribution, A / (g0^2 B) with the lobe's sign
};

struct DeltaNExtraction
{
    InversionState state;
    LineModel model = LineModel::one_lorentzian;
    /// Constant offset y0 of Im K.
    double offset = 0.0;
    /// One entry for the single-Lorentzian model; [inverted, non-inverted] for two.
    std::vector<LorentzianComponent> components;
    /// RMS of Re K minus the real part implied by the fitted components,
    /// relative to the peak |Im K| of the fit.
    double re_consistency = 0.0;
    bool degenerate = false;
    std::vector<std::string> warnings;
    std::optional<fit::FitResult> diagnostics;
};

struct ExtractOptions
{
    /// Seed for B; estimated from the data when empty.
    std::optional<double> half_width_seed;
    /// Manifold population for the inversion ratio; 0 leaves the ratio undefined.
    double n_manifold = 0.0;
    /// Im K amplitudes below this (rad/s) are treated as an empty line.
    double degenerate_level = 1e-2;
};

/**
 * Fits Im K with one or two Lorentzians and converts amplitudes to a
 * population difference. Throws fit::FitError on non-convergence.
 */
DeltaNExtraction extract_delta_n(const ComplexSpectrum& k_spectrum, double g0, LineModel model,
                                 const ExtractOptions& options = {});

struct SpinTemperature
{
    /// |T_s| in kelvin (the spin temperature itself is negative).
    double magnitude = 0.0;
    /// Added noise photons n_s = 1/(exp(hbar w / k_B |T_s|) - 1).
    double noise_photons = 0.0;
};

/// rho = tanh(hbar w / (2 k_B |T_s|)) solved for |T_s|; requires 0 < rho <= 1.
SpinTemperature inversion_to_spin_temperature(double rho, double omega);

} // namespace maser

#endif
