#ifndef MASER_TOOLS_COMMANDS_HPP
#define MASER_TOOLS_COMMANDS_HPP

#include <maser/config.hpp>
#include <maser/spins.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace maser::cli {

enum ExitCode
{
    exit_ok = 0,
    exit_input = 2,
    exit_numerical = 3,
    exit_refused = 4,
};

struct Common
{
    std::optional<std::string> out;
    bool no_meta = false;
    /// Echoed into the provenance header.
    std::string command_line;
};

struct SimulateArgs
{
    /// Absent means the pump is off.
    std::optional<double> pump_dbm;
    double t_span_s = 5000.0;
    bool adiabatic = false;
    bool from_room_temp = false;
    std::size_t samples = 200;
};

struct GainArgs
{
    std::optional<double> delta_n;
    std::optional<double> pump_dbm;
    bool from_room_temp = false;
    std::optional<double> f_start_hz;
    std::optional<double> f_stop_hz;
    std::size_t points = 20001;
};

struct ExtractArgs
{
    std::string spectrum_file;
    LineModel model = LineModel::two_lorentzian;
};

enum class NoiseMode
{
    hemt,
    maser,
};

struct NoiseArgs
{
    std::string sweep_file;
    NoiseMode mode = NoiseMode::hemt;
    std::optional<double> gain_db;
};

struct ThresholdArgs
{
    std::optional<double> g0_hz;
};

struct CompressArgs
{
    std::string curve_file;
};

/*
 * Each command prints a "key: value" report to `report`, writes its data
 * file when an output path is set (--out, else the config's output_file)
 * and throws on failure; exit_code_for() maps the exception to the exit code.
 */
void simulate(const RunConfig& config, const Common& common, const SimulateArgs& args, std::ostream& report);
void gain(const RunConfig& config, const Common& common, const GainArgs& args, std::ostream& report);
void extract(const RunConfig& config, const Common& common, const ExtractArgs& args, std::ostream& report);
void noise(const RunConfig& config, const Common& common, const NoiseArgs& args, std::ostream& report);
void threshold(const RunConfig& config, const ThresholdArgs& args, std::ostream& report);
void compress(const Common& common, const CompressArgs& args, std::ostream& report);

/// Runs `body`, printing the error to `err` and returning the exit code.
int guarded(const std::function<void()>& body, std::ostream& err);

/// Device-input power for a pump level, after the optional room-temperature line loss.
double device_pump_dbm(const RunConfig& config, double pump_dbm, bool from_room_temp);

} // namespace maser::cli

#endif
