#ifndef MASER_FIT_MODELS_HPP
#define MASER_FIT_MODELS_HPP

#include <maser/fitting.hpp>

#include <string>
#include <vector>

namespace maser::fit {

struct RecoveryPoint
{
    double t_wait = 0.0; // s
    double echo = 0.0;
};

enum class RecoveryMode
{
    single,
    double_exp,
};

struct RecoveryFit
{
    double y_inf = 0.0;
    double a_short = 0.0;
    double t1_short = 0.0;
    /// Zero in single mode.
    double a_long = 0.0;
    /// Equal to t1_short in single mode.
    double t1_long = 0.0;
    /// Double mode only: the two components are not separately resolved.
    bool degenerate = false;
    /// Parameters y_inf, A_S, T1_S (and A_L, T1_L), sorted so T1_S <= T1_L.
    FitResult result;

    double model(double t) const;
};

/**
 * Saturation recovery y(t) = y_inf - A_S exp(-t/T1_S) - A_L exp(-t/T1_L).
 * Time constants are fitted on a log scale and seeded by a grid search with
 * the amplitudes solved linearly. Throws FitError on non-convergence.
 */
RecoveryFit fit_biexponential(const std::vector<RecoveryPoint>& data, RecoveryMode mode);

struct CompressionPoint
{
    double p_in = 0.0; // W
    double gain = 0.0; // linear
};

struct CompressionCurve
{
    std::vector<CompressionPoint> points;
    /// Optional seed for G0 (linear); 0 takes the first point.
    double small_signal_gain = 0.0;

    /// At least five points, strictly increasing positive P_in, positive gains.
    void validate() const;
};

inline constexpr const char* compression_model_single_pole = "single-pole";

struct CompressionFit
{
    std::string model = compression_model_single_pole;
    double g0 = 0.0;    // linear
    double g0_db = 0.0;
    double p_c = 0.0;   // W
    double p1db_in = 0.0;  // W
    double p1db_out = 0.0; // W
    double p1db_in_dbm = 0.0;
    double p1db_out_dbm = 0.0;
    /// Parameters g0_db and log10_p_c (log10 of watts).
    FitResult result;

    double gain_db(double p_in) const;
};

/**
 * Fits G(P) = G0 / (1 + P/P_c) in dB. The 1 dB points are derived:
 * P_1dB_in = (10^0.1 - 1) P_c and P_1dB_out(dBm) = P_1dB_in(dBm) + G0(dB) - 1.
 * Throws DomainError when the curve compresses by less than 1 dB and for
 * an unknown model name.
 */
CompressionFit fit_compression(const CompressionCurve& curve,
                               const std::string& model = compression_model_single_pole);

} // namespace maser::fit

#endif
