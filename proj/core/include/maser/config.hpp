#ifndef MASER_CONFIG_HPP
#define MASER_CONFIG_HPP

#include <maser/dynamics.hpp>
#include <maser/resonator.hpp>
#include <maser/spins.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace maser {

/*
 * Flat "key = value" configuration. Keys carry their unit suffix and
 * frequencies are cyclic (the "/2pi" values of the parameter tables); they
 * are converted to angular units on load. "include = path" splices another
 * file in place (paths relative to the including file); later keys override
 * earlier ones across files, but a key may appear only once per file.
 */
struct RunConfig
{
    ResonatorParams resonator;
    /// The resonator-coupled P1+ line.
    SpinEnsembleParams ensemble;
    /// Set when g0 was derived from v_eff_m3.
    std::optional<ModeGeometry> geometry;
    RelaxationRates rates;
    /// w_p - w_r and w_p - w_s(P1_0), rad/s.
    double pump_resonator_detuning = 0.0;
    double pump_spin_detuning = 0.0;
    /// Pump-line attenuation applied with --from-room-temp (dB).
    double pump_line_loss_db = 27.6;
    double t_hemt = 4.19;
    std::optional<std::string> chain_file;
    std::optional<std::string> output_file;

    /// Every file read, in order, and their concatenated text (for hashing).
    std::vector<std::string> sources;
    std::string text;

    double omega_p() const { return resonator.omega_r + pump_resonator_detuning; }
    /// The pumped P1_0 line: same g0 and width, centred at w_p - pump_spin_detuning.
    SpinEnsembleParams pumped_line() const;
    /// Rate system with gamma_p from a pump power at the device input (W).
    RateSystemParams rate_params(double pump_power_watts) const;
};

/// Keys understood by the parser.
const std::vector<std::string>& config_keys();

RunConfig parse_config(std::istream& in, const std::string& source, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Relaxation rates of the rate-equation tables (converted to rad/s).
RelaxationRates default_relaxation_rates();

} // namespace maser

#endif
