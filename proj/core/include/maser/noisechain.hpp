#ifndef MASER_NOISECHAIN_HPP
#define MASER_NOISECHAIN_HPP

#include <string>
#include <utility>
#include <vector>

namespace maser::noise {

/// Insertion loss of one mechanical switch (dB), from the vendor datasheet.
inline constexpr double switch_loss_db = 0.3;

/// Lossy element at a physical temperature, modelled as a beam splitter.
struct ChainComponent
{
    /// Power transmission, 0 < beta <= 1.
    double beta = 1.0;
    double t_phys = 0.0;
    std::string label;

    static ChainComponent from_loss_db(double loss_db, double t_phys, std::string label);
    void validate() const;
};

using Chain = std::vector<ChainComponent>;

/// n_{j+1} = beta_j n_j + (1 - beta_j) n_th(T_j), folded left to right.
double propagate_occupation(double n_in, const Chain& chain, double omega);

/// Source temperature referred through the chain to the device input (K).
double corrected_input_temperature(double t_source, const Chain& chain, double omega);

struct SweepPoint
{
    double t_in = 0.0;  // K
    double p_out = 0.0; // W
};

struct NoiseSweep
{
    std::vector<SweepPoint> points;
    double bandwidth = 0.0; // Hz
    std::string label;

    /// At least three points with distinct T_in, positive bandwidth.
    void validate() const;
};

struct SweepFit
{
    /// x-intercept magnitude of the P_out(T_in) line (K).
    double t_sys = 0.0;
    double t_sys_sigma = 0.0;
    /// dP_out/dT_in = G k_B df (W/K).
    double slope = 0.0;
    double slope_sigma = 0.0;
    double intercept = 0.0;
    double intercept_sigma = 0.0;
    /// slope / (k_B bandwidth); divided by gain_product when one was given.
    double gain = 0.0;
    double residual_norm = 0.0;
};

/**
 * Ordinary least squares of P_out against T_in. gain_product (> 0) divides
 * the fitted gain to isolate the remaining stages; pass 1 to report the
 * total. Throws DomainError for a rank-deficient sweep.
 */
SweepFit fit_noise_sweep(const NoiseSweep& sweep, double gain_product = 1.0);

struct AmplifierStage
{
    double gain = 1.0;
    double t_noise = 0.0;

    void validate() const;
};

/// Friis accumulation T1 + T2/G1 + T3/(G1 G2) + ...
double cascade_noise(const std::vector<AmplifierStage>& stages);

struct MaserNoise
{
    double t_maser = 0.0;
    /// Set when the subtraction went negative.
    std::vector<std::string> warnings;
};

/// T_maser = T_sys - T_following / G_maser.
MaserNoise maser_noise_from_system(double t_sys, double t_following, double g_maser);

} // namespace maser::noise

#endif
