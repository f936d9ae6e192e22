#include "commands.hpp"

#include <maser/config.hpp>
#include <maser/errors.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

using namespace maser;

struct CommonFlags
{
    std::string config;
    cli::Common common;
    std::string out;
};

void add_common(CLI::App* sub, CommonFlags& flags, bool config_required)
{
    auto* opt = sub->add_option("--config", flags.config, "configuration file");
    if (config_required) {
        opt->required();
    }
    sub->add_option("--out", flags.out, "output data file");
    sub->add_flag("--no-meta", flags.common.no_meta, "omit the timestamp from output headers");
}

cli::Common finish(CommonFlags& flags, const std::string& command_line)
{
    cli::Common c = flags.common;
    if (!flags.out.empty()) {
        c.out = flags.out;
    }
    c.command_line = command_line;
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Diamond maser amplifier simulation and analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", MASER_VERSION_STRING);

    std::string command_line;
    for (int i = 1; i < argc; ++i) {
        command_line += (i > 1 ? " " : "") + std::string(argv[i]);
    }

    CommonFlags sim_f, gain_f, ext_f, noise_f, thr_f, comp_f;

    cli::SimulateArgs sim;
    double sim_pump = 0.0;
    auto* sim_cmd = app.add_subcommand("simulate", "integrate the rate equations under a pump");
    add_common(sim_cmd, sim_f, true);
    auto* sim_pump_opt = sim_cmd->add_option("--pump-dbm", sim_pump, "pump power; omit for no pump");
    sim_cmd->add_option("--t-span-s", sim.t_span_s, "simulated time (s)")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--samples", sim.samples, "output samples")->check(CLI::PositiveNumber);
    sim_cmd->add_flag("--adiabatic", sim.adiabatic, "eliminate the photon number adiabatically");
    sim_cmd->add_flag("--from-room-temp", sim.from_room_temp, "subtract the pump-line attenuation");

    cli::GainArgs gain;
    double gain_dn = 0.0;
    double gain_pump = 0.0;
    double f_start = 0.0;
    double f_stop = 0.0;
    auto* gain_cmd = app.add_subcommand("gain", "reflection gain spectrum");
    add_common(gain_cmd, gain_f, true);
    auto* gain_dn_opt = gain_cmd->add_option("--delta-n", gain_dn, "population difference N_u - N_l");
    auto* gain_pump_opt = gain_cmd->add_option("--pump-dbm", gain_pump, "pump power at the device input");
    gain_dn_opt->excludes(gain_pump_opt);
    gain_cmd->add_flag("--from-room-temp", gain.from_room_temp, "subtract the pump-line attenuation");
    auto* f_start_opt = gain_cmd->add_option("--f-start", f_start, "first frequency (Hz)");
    auto* f_stop_opt = gain_cmd->add_option("--f-stop", f_stop, "last frequency (Hz)");
    gain_cmd->add_option("--points", gain.points, "grid points")->check(CLI::Range(2, 10000000));

    cli::ExtractArgs ext;
    std::string ext_model = "two";
    auto* ext_cmd = app.add_subcommand("extract", "population difference from a reflection spectrum");
    add_common(ext_cmd, ext_f, true);
    ext_cmd->add_option("spectrum", ext.spectrum_file, "spectrum file")->required();
    ext_cmd->add_option("--model", ext_model, "one | two")->check(CLI::IsMember({"one", "two"}));

    cli::NoiseArgs noise;
    std::string noise_mode = "hemt";
    double noise_gain = 0.0;
    auto* noise_cmd = app.add_subcommand("noise", "noise temperature from a Y-factor sweep");
    add_common(noise_cmd, noise_f, true);
    noise_cmd->add_option("sweep", noise.sweep_file, "noise sweep file")->required();
    noise_cmd->add_option("--mode", noise_mode, "hemt | maser")->check(CLI::IsMember({"hemt", "maser"}));
    auto* noise_gain_opt = noise_cmd->add_option("--gain-db", noise_gain, "maser gain (dB)");

    cli::ThresholdArgs thr;
    double thr_g0 = 0.0;
    auto* thr_cmd = app.add_subcommand("threshold", "self-oscillation threshold");
    add_common(thr_cmd, thr_f, true);
    auto* thr_g0_opt = thr_cmd->add_option("--g0-hz", thr_g0, "override g0/2pi (Hz)");

    cli::CompressArgs comp;
    auto* comp_cmd = app.add_subcommand("compress", "1 dB compression from a gain curve");
    add_common(comp_cmd, comp_f, false);
    comp_cmd->add_option("curve", comp.curve_file, "compression curve file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::exit_input;
    }

    auto load = [](const CommonFlags& f) { return load_config(f.config); };

    const int code = cli::guarded(
        [&] {
            if (sim_cmd->parsed()) {
                if (*sim_pump_opt) {
                    sim.pump_dbm = sim_pump;
                }
                cli::simulate(load(sim_f), finish(sim_f, command_line), sim, std::cout);
            } else if (gain_cmd->parsed()) {
                if (*gain_dn_opt) {
                    gain.delta_n = gain_dn;
                }
                if (*gain_pump_opt) {
                    gain.pump_dbm = gain_pump;
                }
                if (*f_start_opt) {
                    gain.f_start_hz = f_start;
                }
                if (*f_stop_opt) {
                    gain.f_stop_hz = f_stop;
                }
                cli::gain(load(gain_f), finish(gain_f, command_line), gain, std::cout);
            } else if (ext_cmd->parsed()) {
                ext.model = ext_model == "one" ? LineModel::one_lorentzian : LineModel::two_lorentzian;
                cli::extract(load(ext_f), finish(ext_f, command_line), ext, std::cout);
            } else if (noise_cmd->parsed()) {
                noise.mode = noise_mode == "maser" ? cli::NoiseMode::maser : cli::NoiseMode::hemt;
                if (*noise_gain_opt) {
                    noise.gain_db = noise_gain;
                }
                cli::noise(load(noise_f), finish(noise_f, command_line), noise, std::cout);
            } else if (thr_cmd->parsed()) {
                if (*thr_g0_opt) {
                    thr.g0_hz = thr_g0;
                }
                cli::threshold(load(thr_f), thr, std::cout);
            } else if (comp_cmd->parsed()) {
                cli::compress(finish(comp_f, command_line), comp, std::cout);
            }
        },
        std::cerr);
    return code;
}
