#include <maser/config.hpp>

#include <maser/errors.hpp>
#include <maser/text.hpp>
#include <maser/units.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace maser {

namespace {

namespace fs = std::filesystem;

struct Entry
{
    std::string value;
    std::string source;
    int line = 0;
};

using Entries = std::map<std::string, Entry>;

const std::vector<std::string> path_keys = {"chain_file", "output_file"};

std::string base_of(const std::string& key)
{
    const auto pos = key.rfind('_');
    return pos == std::string::npos ? key : key.substr(0, pos);
}

std::string unknown_key_message(const std::string& key)
{
    std::string msg = "unknown key '" + key + "'";
    for (const auto& k : config_keys()) {
        if (base_of(k) == key || base_of(k) == base_of(key)) {
            return msg + " (did you mean '" + k + "'?)";
        }
    }
    return msg;
}

void read_entries(std::istream& in, const std::string& source, const std::string& base_dir, Entries& entries,
                  RunConfig& cfg, int depth)
{
    if (depth > 8) {
        throw ParseError(source, 0, "include nesting too deep (cycle?)");
    }
    std::vector<std::string> seen;
    std::string line;
    int number = 0;
    std::string text;
    while (std::getline(in, line)) {
        ++number;
        text += line;
        text += '\n';
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) {
            s = s.substr(0, hash);
        }
        s = io::trim(s);
        if (s.empty()) {
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(source, number, "expected 'key = value'");
        }
        const std::string key(io::trim(s.substr(0, eq)));
        const std::string value(io::trim(s.substr(eq + 1)));
        if (value.empty()) {
            throw ParseError(source, number, "empty value for '" + key + "'");
        }
        if (key == "include") {
            const fs::path p = fs::path(base_dir) / value;
            std::ifstream inc(p);
            if (!inc) {
                throw ParseError(source, number, "cannot open include '" + p.string() + "'");
            }
            cfg.text += text;
            text.clear();
            cfg.sources.push_back(p.string());
            read_entries(inc, p.string(), p.parent_path().string(), entries, cfg, depth + 1);
            continue;
        }
        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ParseError(source, number, unknown_key_message(key));
        }
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
            throw ParseError(source, number, "duplicate key '" + key + "'");
        }
        seen.push_back(key);
        std::string stored = value;
        if (std::find(path_keys.begin(), path_keys.end(), key) != path_keys.end()) {
            stored = fs::path(value).is_absolute() ? value : (fs::path(base_dir) / value).string();
        }
        entries[key] = {stored, source, number};
    }
    cfg.text += text;
}

class Reader
{
public:
    Reader(const Entries& entries, std::string source) : m_entries(entries), m_source(std::move(source)) {}

    bool has(const std::string& key) const { return m_entries.count(key) > 0; }

    double number(const std::string& key) const
    {
        const Entry& e = m_entries.at(key);
        return io::parse_double(e.value, e.source, e.line);
    }

    double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    double positive(const std::string& key) const
    {
        const double v = number(key);
        if (!(v > 0.0)) {
            fail(key, "must be positive");
        }
        return v;
    }

    double non_negative_or(const std::string& key, double fallback) const
    {
        if (!has(key)) {
            return fallback;
        }
        const double v = number(key);
        if (!(v >= 0.0)) {
            fail(key, "must be non-negative");
        }
        return v;
    }

    void exactly_one(const std::string& a, const std::string& b) const
    {
        if (has(a) == has(b)) {
            const std::string what = has(a) ? "give only one of '" : "missing '";
            const std::string loc = has(a) ? m_entries.at(b).source : m_source;
            const int line = has(a) ? m_entries.at(b).line : 0;
            throw ParseError(loc, line, what + a + "' or '" + b + "'");
        }
    }

    void require(const std::string& key) const
    {
        if (!has(key)) {
            throw ParseError(m_source, 0, "missing required key '" + key + "'");
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const
    {
        const Entry& e = m_entries.at(key);
        throw ParseError(e.source, e.line, "'" + key + "' " + msg);
    }

    const std::string& text(const std::string& key) const { return m_entries.at(key).value; }

private:
    const Entries& m_entries;
    std::string m_source;
};

} // namespace

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = {
        "f_r_hz", "q_ext", "kappa_ext_hz", "q_int", "kappa_int_hz",
        "g0_hz", "v_eff_m3", "matrix_element", "n_total", "f_s_hz", "gamma_fwhm_hz",
        "gamma41_hz", "gamma52_hz", "gamma63_eff_hz", "gamma_cr_hz",
        "pump_resonator_detuning_hz", "pump_spin_detuning_hz", "pump_line_loss_db",
        "t_hemt_k", "chain_file", "output_file",
    };
    return keys;
}

RelaxationRates default_relaxation_rates()
{
    return {hz_to_angular(9.6e-5), hz_to_angular(9.6e-5), hz_to_angular(1.5e-4), hz_to_angular(6.0e-2)};
}

SpinEnsembleParams RunConfig::pumped_line() const
{
    SpinEnsembleParams p = ensemble;
    p.omega_s = omega_p() - pump_spin_detuning;
    return p;
}

RateSystemParams RunConfig::rate_params(double pump_power_watts) const
{
    const double gp = pump_rate(pump_power_watts, resonator, pumped_line(), omega_p());
    return make_rate_params(resonator, ensemble, rates, gp);
}

RunConfig parse_config(std::istream& in, const std::string& source, const std::string& base_dir)
{
    RunConfig cfg;
    cfg.sources.push_back(source);
    Entries entries;
    read_entries(in, source, base_dir, entries, cfg, 0);
    const Reader r(entries, source);

    r.require("f_r_hz");
    r.exactly_one("q_ext", "kappa_ext_hz");
    r.exactly_one("q_int", "kappa_int_hz");
    r.exactly_one("g0_hz", "v_eff_m3");
    r.require("n_total");
    r.require("gamma_fwhm_hz");

    const double omega_r = hz_to_angular(r.positive("f_r_hz"));
    cfg.resonator.omega_r = omega_r;
    cfg.resonator.kappa_ext =
        r.has("q_ext") ? omega_r / r.positive("q_ext") : hz_to_angular(r.positive("kappa_ext_hz"));
    if (r.has("q_int")) {
        cfg.resonator.kappa_int = omega_r / r.positive("q_int");
    } else {
        cfg.resonator.kappa_int = hz_to_angular(r.non_negative_or("kappa_int_hz", 0.0));
    }

    if (r.has("matrix_element") && !r.has("v_eff_m3")) {
        r.fail("matrix_element", "only applies together with 'v_eff_m3'");
    }
    if (r.has("g0_hz")) {
        cfg.ensemble.g0 = hz_to_angular(r.positive("g0_hz"));
    } else {
        ModeGeometry geo{r.positive("v_eff_m3"), r.number_or("matrix_element", 0.5)};
        try {
            geo.validate();
        } catch (const DomainError& e) {
            r.fail("matrix_element", e.what());
        }
        cfg.geometry = geo;
        cfg.ensemble.g0 = single_spin_coupling(geo, omega_r);
    }
    cfg.ensemble.n_total = r.positive("n_total");
    cfg.ensemble.omega_s = r.has("f_s_hz") ? hz_to_angular(r.positive("f_s_hz")) : omega_r;
    cfg.ensemble.gamma = hz_to_angular(r.positive("gamma_fwhm_hz"));

    const RelaxationRates defaults = default_relaxation_rates();
    cfg.rates.gamma41 = r.has("gamma41_hz") ? hz_to_angular(r.non_negative_or("gamma41_hz", 0.0)) : defaults.gamma41;
    cfg.rates.gamma52 = r.has("gamma52_hz") ? hz_to_angular(r.non_negative_or("gamma52_hz", 0.0)) : defaults.gamma52;
    cfg.rates.gamma63_eff =
        r.has("gamma63_eff_hz") ? hz_to_angular(r.non_negative_or("gamma63_eff_hz", 0.0)) : defaults.gamma63_eff;
    cfg.rates.gamma_cr = r.has("gamma_cr_hz") ? hz_to_angular(r.non_negative_or("gamma_cr_hz", 0.0)) : defaults.gamma_cr;

    cfg.pump_resonator_detuning = hz_to_angular(r.number_or("pump_resonator_detuning_hz", -100e6));
    cfg.pump_spin_detuning = hz_to_angular(r.number_or("pump_spin_detuning_hz", 0.0));
    cfg.pump_line_loss_db = r.non_negative_or("pump_line_loss_db", 27.6);
    cfg.t_hemt = r.non_negative_or("t_hemt_k", 4.19);
    if (r.has("chain_file")) {
        cfg.chain_file = r.text("chain_file");
    }
    if (r.has("output_file")) {
        cfg.output_file = r.text("output_file");
    }
    if (!(cfg.omega_p() > 0.0)) {
        r.fail("pump_resonator_detuning_hz", "puts the pump at a non-positive frequency");
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, 0, "cannot open configuration file");
    }
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_config(in, path, dir.empty() ? "." : dir);
}

} // namespace maser
