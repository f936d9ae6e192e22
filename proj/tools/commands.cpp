#include "commands.hpp"

#include <maser/dynamics.hpp>
#include <maser/errors.hpp>
#include <maser/fit_models.hpp>
#include <maser/io.hpp>
#include <maser/noisechain.hpp>
#include <maser/resonator.hpp>
#include <maser/units.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace maser::cli {

namespace {

using io::format_double;

std::string utc_now()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::optional<std::string> output_path(const RunConfig* config, const Common& common)
{
    if (common.out) {
        return common.out;
    }
    if (config && config->output_file) {
        return config->output_file;
    }
    return std::nullopt;
}

// Opens the data file and writes the provenance header; empty when no path is set.
std::optional<std::ofstream> open_output(const RunConfig* config, const Common& common, const std::string& command)
{
    const auto path = output_path(config, common);
    if (!path) {
        return std::nullopt;
    }
    std::ofstream out(*path);
    if (!out) {
        throw ParseError(*path, 0, "cannot open output file");
    }
    io::Provenance p;
    p.command = common.command_line.empty() ? command : common.command_line;
    if (config) {
        p.config_hash = io::fnv1a_hex(config->text);
    }
    if (!common.no_meta) {
        p.timestamp = utc_now();
    }
    io::write_provenance(out, p);
    return out;
}

void line(std::ostream& out, const std::string& key, double value)
{
    out << key << ": " << format_double(value) << '\n';
}

void line(std::ostream& out, const std::string& key, const std::string& value)
{
    out << key << ": " << value << '\n';
}

double threshold_of(const RunConfig& config)
{
    return oscillation_threshold(config.resonator, config.ensemble);
}

} // namespace

double device_pump_dbm(const RunConfig& config, double pump_dbm, bool from_room_temp)
{
    return from_room_temp ? pump_dbm - config.pump_line_loss_db : pump_dbm;
}

void simulate(const RunConfig& config, const Common& common, const SimulateArgs& args, std::ostream& report)
{
    double gamma_p_power = 0.0;
    if (args.pump_dbm) {
        gamma_p_power = dbm_to_watts(device_pump_dbm(config, *args.pump_dbm, args.from_room_temp));
    }
    const RateSystemParams params = config.rate_params(gamma_p_power);
    const RateSystemState initial = RateSystemState::ground(params.n_tot);

    IntegrateOptions opt;
    opt.adiabatic = args.adiabatic;
    opt.samples = args.samples;
    const TimeSeries series = integrate(initial, params, args.t_span_s, opt);

    const double thr = threshold_of(config);
    const double final_dn = series.states.back().delta_n_p1plus();
    const double free = params.gamma_s > 0.0 ? unclamped_inversion(params, initial) : final_dn;
    const bool oscillating = free >= thr && final_dn >= 0.95 * thr;

    if (auto out = open_output(&config, common, "simulate")) {
        io::write_time_series(*out, series);
    }
    if (args.pump_dbm) {
        line(report, "pump_dbm_device", device_pump_dbm(config, *args.pump_dbm, args.from_room_temp));
    } else {
        line(report, "pump_dbm_device", "off");
    }
    line(report, "gamma_p_rad_s", params.gamma_p);
    line(report, "t_span_s", args.t_span_s);
    line(report, "final_delta_n", final_dn);
    line(report, "final_photons", series.states.back().n);
    line(report, "threshold_delta_n", thr);
    line(report, "threshold_fraction", final_dn / thr);
    line(report, "unclamped_delta_n", free);
    line(report, "oscillating", oscillating ? "yes" : "no");
    line(report, "steps_accepted", static_cast<double>(series.stats.accepted));
    line(report, "clamp_events", static_cast<double>(series.log.size()));
}

void gain(const RunConfig& config, const Common& common, const GainArgs& args, std::ostream& report)
{
    if (args.delta_n.has_value() == args.pump_dbm.has_value()) {
        throw DomainError("gain: give exactly one of --delta-n or --pump-dbm");
    }
    const double thr = threshold_of(config);
    double delta_n = 0.0;
    if (args.delta_n) {
        delta_n = *args.delta_n;
    } else {
        const double p = dbm_to_watts(device_pump_dbm(config, *args.pump_dbm, args.from_room_temp));
        const RateSystemParams params = config.rate_params(p);
        delta_n = steady_state(params, RateSystemState::ground(params.n_tot)).delta_n_p1plus();
    }
    if (delta_n >= thr) {
        throw ThresholdExceeded("gain: delta_n at or above the self-oscillation threshold", delta_n, thr);
    }

    const double kt_hz = angular_to_hz(config.resonator.kappa_tot());
    const double f_r = angular_to_hz(config.resonator.omega_r);
    const double start = args.f_start_hz.value_or(f_r - kt_hz);
    const double stop = args.f_stop_hz.value_or(f_r + kt_hz);
    const auto grid = linear_grid(hz_to_angular(start), hz_to_angular(stop), args.points);
    GainSpectrum spec;
    try {
        spec = gain_spectrum(config.resonator, config.ensemble, delta_n, grid);
    } catch (const SingularityError&) {
        throw ThresholdExceeded("gain: configuration is self-oscillating", delta_n, thr);
    }

    if (auto out = open_output(&config, common, "gain")) {
        io::write_spectrum(*out, spec.reflection, &spec.power_gain_db);
    }
    line(report, "delta_n", delta_n);
    line(report, "threshold_delta_n", thr);
    line(report, "kappa_s_hz", angular_to_hz(spin_transition_rate(config.ensemble, delta_n)));
    line(report, "G_peak_db", spec.peak_gain_db);
    line(report, "peak_frequency_hz", angular_to_hz(spec.peak_omega));
    line(report, "baseline_db", spec.baseline_db);
    if (spec.fwhm) {
        line(report, "fwhm_hz", angular_to_hz(*spec.fwhm));
        line(report, "gbw_hz", angular_to_hz(*spec.gain_bandwidth));
    } else {
        line(report, "fwhm_hz", "n/a");
        line(report, "gbw_hz", "n/a");
    }
}

void extract(const RunConfig& config, const Common& common, const ExtractArgs& args, std::ostream& report)
{
    const ComplexSpectrum r = io::read_spectrum_file(args.spectrum_file);
    if (!(r.frequencies.front() < config.resonator.omega_r && r.frequencies.back() > config.resonator.omega_r)) {
        throw DomainError("extract: spectrum does not bracket the resonance frequency");
    }
    const ComplexSpectrum k = k_from_reflection(config.resonator, r);
    ExtractOptions opt;
    opt.half_width_seed = 0.5 * config.ensemble.gamma;
    opt.n_manifold = config.ensemble.n_total;
    const DeltaNExtraction ex = extract_delta_n(k, config.ensemble.g0, args.model, opt);

    if (auto out = open_output(&config, common, "extract")) {
        io::write_spectrum(*out, k);
    }
    line(report, "model", args.model == LineModel::one_lorentzian ? "one" : "two");
    line(report, "delta_n", ex.state.delta_n);
    line(report, "inversion_ratio", ex.state.inversion_ratio());
    line(report, "offset_rad_s", ex.offset);
    line(report, "re_consistency", ex.re_consistency);
    line(report, "degenerate", ex.degenerate ? "yes" : "no");
    for (std::size_t i = 0; i < ex.components.size(); ++i) {
        const auto& c = ex.components[i];
        const std::string tag = "component" + std::to_string(i + 1);
        report << tag << ": amplitude=" << format_double(c.amplitude)
               << " center_hz=" << format_double(angular_to_hz(c.center))
               << " half_width_hz=" << format_double(angular_to_hz(c.half_width))
               << " delta_n=" << format_double(c.delta_n) << '\n';
    }
    if (ex.diagnostics) {
        line(report, "residual_norm", ex.diagnostics->residual_norm);
        line(report, "iterations", static_cast<double>(ex.diagnostics->iterations));
    }
    for (const auto& w : ex.warnings) {
        line(report, "warning", w);
    }
}

void noise(const RunConfig& config, const Common& common, const NoiseArgs& args, std::ostream& report)
{
    if (!config.chain_file) {
        throw ParseError(config.sources.front(), 0, "noise: configuration has no 'chain_file'");
    }
    if (args.mode == NoiseMode::maser && !args.gain_db) {
        throw DomainError("noise: maser mode requires --gain-db");
    }
    const noise::Chain chain = io::read_chain_file(*config.chain_file);
    noise::NoiseSweep sweep = io::read_noise_sweep_file(args.sweep_file);
    const double omega = config.resonator.omega_r;
    for (auto& p : sweep.points) {
        p.t_in = noise::corrected_input_temperature(p.t_in, chain, omega);
    }
    const noise::SweepFit fit = noise::fit_noise_sweep(sweep);

    if (auto out = open_output(&config, common, "noise")) {
        io::write_noise_sweep(*out, sweep);
    }
    line(report, "mode", args.mode == NoiseMode::hemt ? "hemt" : "maser");
    line(report, "t_sys_k", fit.t_sys);
    line(report, "t_sys_sigma_k", fit.t_sys_sigma);
    line(report, "slope_w_per_k", fit.slope);
    line(report, "slope_sigma_w_per_k", fit.slope_sigma);
    line(report, "gain_total_db", fit.gain > 0.0 ? ratio_to_db(fit.gain) : -INFINITY);
    if (args.mode == NoiseMode::maser) {
        const double g = db_to_ratio(*args.gain_db);
        const noise::MaserNoise mn = noise::maser_noise_from_system(fit.t_sys, config.t_hemt, g);
        line(report, "t_hemt_k", config.t_hemt);
        line(report, "t_maser_k", mn.t_maser);
        if (mn.t_maser > 0.0) {
            line(report, "noise_photons", thermal_photons(mn.t_maser, omega));
        }
        for (const auto& w : mn.warnings) {
            line(report, "warning", w);
        }
    } else {
        line(report, "noise_photons", fit.t_sys > 0.0 ? thermal_photons(fit.t_sys, omega) : 0.0);
    }
}

void threshold(const RunConfig& config, const ThresholdArgs& args, std::ostream& report)
{
    SpinEnsembleParams ens = config.ensemble;
    if (args.g0_hz) {
        if (!(*args.g0_hz > 0.0)) {
            throw DomainError("threshold: --g0-hz must be positive");
        }
        ens.g0 = hz_to_angular(*args.g0_hz);
    }
    const double thr = oscillation_threshold(config.resonator, ens);
    line(report, "g0_hz", angular_to_hz(ens.g0));
    line(report, "delta_n_thr", thr);
    line(report, "kappa_s_hz", angular_to_hz(spin_transition_rate(ens, thr)));
    line(report, "kappa_tot_hz", angular_to_hz(config.resonator.kappa_tot()));
    line(report, "threshold_inversion_ratio", thr / ens.n_total);
}

void compress(const Common& common, const CompressArgs& args, std::ostream& report)
{
    const fit::CompressionCurve curve = io::read_compression_file(args.curve_file);
    const fit::CompressionFit f = fit::fit_compression(curve);
    if (auto out = open_output(nullptr, common, "compress")) {
        fit::CompressionCurve model = curve;
        for (auto& p : model.points) {
            p.gain = db_to_ratio(f.gain_db(p.p_in));
        }
        io::write_compression(*out, model);
    }
    line(report, "model", f.model);
    line(report, "G0_db", f.g0_db);
    line(report, "P_c_dbm", watts_to_dbm(f.p_c));
    line(report, "P_1dB_in_dbm", f.p1db_in_dbm);
    line(report, "P_1dB_out_dbm", f.p1db_out_dbm);
    report << fit::format_report(f.result);
}

int guarded(const std::function<void()>& body, std::ostream& err)
{
    try {
        body();
        return exit_ok;
    } catch (const ThresholdExceeded& e) {
        err << "refused: " << e.what() << "\n"
            << "threshold_delta_n: " << format_double(e.threshold_delta_n()) << "\n"
            << "requested_delta_n: " << format_double(e.unclamped_delta_n()) << '\n';
        return exit_refused;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const fit::FitError& e) {
        err << "numerical failure: " << e.what() << '\n' << fit::format_report(e.best());
        return exit_numerical;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
}

} // namespace maser::cli
