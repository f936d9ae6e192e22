#include <maser/io.hpp>

#include <maser/errors.hpp>
#include <maser/units.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace maser::io {

std::string format_double(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view field, const std::string& source, int line)
{
    const std::string_view f = trim(field);
    if (f.empty()) {
        throw ParseError(source, line, "empty numeric field");
    }
    std::string_view body = f;
    if (body.front() == '+') {
        body.remove_prefix(1);
    }
    double value = 0.0;
    const auto res = std::from_chars(body.data(), body.data() + body.size(), value);
    if (res.ec != std::errc() || res.ptr != body.data() + body.size()) {
        throw ParseError(source, line, "not a number: '" + std::string(f) + "'");
    }
    if (!std::isfinite(value)) {
        throw ParseError(source, line, "non-finite number: '" + std::string(f) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(std::string_view line, char delim)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::optional<std::string> Table::field(const std::string& key) const
{
    for (const auto& [k, v] : fields) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

namespace {

struct RawTable
{
    std::vector<std::pair<std::string, std::string>> fields;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> lines;
    int header_line = 0;
};

RawTable read_raw(std::istream& in, const std::string& source, const std::vector<std::string>& required,
                  bool allow_extra)
{
    RawTable t;
    std::string line;
    int number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++number;
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') {
            continue;
        }
        if (!have_header) {
            const auto eq = s.find('=');
            if (eq != std::string_view::npos) {
                const std::string key(trim(s.substr(0, eq)));
                const std::string value(trim(s.substr(eq + 1)));
                if (key.empty()) {
                    throw ParseError(source, number, "header field without a key");
                }
                for (const auto& f : t.fields) {
                    if (f.first == key) {
                        throw ParseError(source, number, "duplicate header field '" + key + "'");
                    }
                }
                t.fields.emplace_back(key, value);
                continue;
            }
            t.columns = split_fields(s);
            t.header_line = number;
            have_header = true;
            if (t.columns.size() < required.size() || (!allow_extra && t.columns.size() != required.size())) {
                throw ParseError(source, number, "expected columns '" + [&] {
                    std::string j;
                    for (std::size_t i = 0; i < required.size(); ++i) {
                        j += (i ? ", " : "") + required[i];
                    }
                    return j;
                }() + "'");
            }
            for (std::size_t i = 0; i < required.size(); ++i) {
                if (t.columns[i] != required[i]) {
                    throw ParseError(source, number,
                                     "column " + std::to_string(i + 1) + " must be '" + required[i] +
                                         "', found '" + t.columns[i] + "'");
                }
            }
            continue;
        }
        auto fields = split_fields(s);
        if (fields.size() != t.columns.size()) {
            throw ParseError(source, number,
                             "expected " + std::to_string(t.columns.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
        t.lines.push_back(number);
    }
    if (!have_header) {
        throw ParseError(source, number, "missing column header");
    }
    return t;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, 0, "cannot open file");
    }
    return in;
}

void write_row(std::ostream& out, std::initializer_list<double> values)
{
    bool first = true;
    for (double v : values) {
        if (!first) {
            out << ", ";
        }
        out << format_double(v);
        first = false;
    }
    out << '\n';
}

const std::vector<std::string> spectrum_columns = {"frequency_hz", "re", "im"};
const std::vector<std::string> series_columns = {"t_s", "N1", "N2", "N3", "N4", "N5", "N6", "n", "deltaN_p1plus"};
const std::vector<std::string> sweep_columns = {"t_in_K", "p_out_W"};
const std::vector<std::string> chain_columns = {"label", "attenuation", "t_phys_K"};
const std::vector<std::string> compression_columns = {"p_in_dbm", "gain_db"};

} // namespace

Table read_table(std::istream& in, const std::string& source, const std::vector<std::string>& required,
                 bool allow_extra)
{
    RawTable raw = read_raw(in, source, required, allow_extra);
    Table t;
    t.source = source;
    t.fields = std::move(raw.fields);
    t.columns = std::move(raw.columns);
    t.lines = raw.lines;
    t.rows.reserve(raw.rows.size());
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        std::vector<double> row;
        row.reserve(raw.rows[i].size());
        for (const auto& f : raw.rows[i]) {
            row.push_back(parse_double(f, source, raw.lines[i]));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string fnv1a_hex(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

void write_provenance(std::ostream& out, const Provenance& p)
{
    out << "# maser-toolkit " << MASER_VERSION_STRING << '\n';
    if (!p.command.empty()) {
        out << "# command: " << p.command << '\n';
    }
    if (!p.config_hash.empty()) {
        out << "# config_fnv1a: " << p.config_hash << '\n';
    }
    if (!p.timestamp.empty()) {
        out << "# generated: " << p.timestamp << '\n';
    }
    for (const auto& [k, v] : p.extra) {
        out << "# " << k << ": " << v << '\n';
    }
}

ComplexSpectrum read_spectrum(std::istream& in, const std::string& source)
{
    const Table t = read_table(in, source, spectrum_columns, true);
    ComplexSpectrum s;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const double w = hz_to_angular(r[0]);
        if (!s.frequencies.empty() && !(w > s.frequencies.back())) {
            throw ParseError(source, t.lines[i], "frequencies must be strictly increasing");
        }
        s.frequencies.push_back(w);
        s.values.emplace_back(r[1], r[2]);
    }
    if (s.size() == 0) {
        throw ParseError(source, 0, "spectrum has no data rows");
    }
    return s;
}

ComplexSpectrum read_spectrum_file(const std::string& path)
{
    auto in = open_input(path);
    return read_spectrum(in, path);
}

void write_spectrum(std::ostream& out, const ComplexSpectrum& spectrum, const std::vector<double>* gain_db)
{
    spectrum.validate();
    if (gain_db && gain_db->size() != spectrum.size()) {
        throw DomainError("write_spectrum: gain column length mismatch");
    }
    out << "frequency_hz, re, im" << (gain_db ? ", gain_db" : "") << '\n';
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        out << format_double(angular_to_hz(spectrum.frequencies[i])) << ", "
            << format_double(spectrum.values[i].real()) << ", " << format_double(spectrum.values[i].imag());
        if (gain_db) {
            out << ", " << format_double((*gain_db)[i]);
        }
        out << '\n';
    }
}

TimeSeries read_time_series(std::istream& in, const std::string& source)
{
    const Table t = read_table(in, source, series_columns);
    TimeSeries ts;
    for (const auto& r : t.rows) {
        RateSystemState s;
        for (std::size_t k = 0; k < 6; ++k) {
            s.N[k] = r[k + 1];
        }
        s.n = r[7];
        ts.t.push_back(r[0]);
        ts.states.push_back(s);
    }
    return ts;
}

void write_time_series(std::ostream& out, const TimeSeries& series)
{
    out << "t_s, N1, N2, N3, N4, N5, N6, n, deltaN_p1plus\n";
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        const auto& s = series.states[i];
        write_row(out, {series.t[i], s.N[0], s.N[1], s.N[2], s.N[3], s.N[4], s.N[5], s.n, s.delta_n_p1plus()});
    }
}

noise::NoiseSweep read_noise_sweep(std::istream& in, const std::string& source)
{
    const Table t = read_table(in, source, sweep_columns);
    noise::NoiseSweep sweep;
    const auto bw = t.field("bandwidth_hz");
    if (!bw) {
        throw ParseError(source, 0, "missing header field 'bandwidth_hz'");
    }
    sweep.bandwidth = parse_double(*bw, source, 0);
    sweep.label = t.field("label").value_or("");
    for (const auto& r : t.rows) {
        sweep.points.push_back({r[0], r[1]});
    }
    return sweep;
}

noise::NoiseSweep read_noise_sweep_file(const std::string& path)
{
    auto in = open_input(path);
    return read_noise_sweep(in, path);
}

void write_noise_sweep(std::ostream& out, const noise::NoiseSweep& sweep)
{
    out << "bandwidth_hz = " << format_double(sweep.bandwidth) << '\n';
    if (!sweep.label.empty()) {
        out << "label = " << sweep.label << '\n';
    }
    out << "t_in_K, p_out_W\n";
    for (const auto& p : sweep.points) {
        write_row(out, {p.t_in, p.p_out});
    }
}

noise::Chain read_chain(std::istream& in, const std::string& source)
{
    const RawTable t = read_raw(in, source, chain_columns, false);
    noise::Chain chain;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const int line = t.lines[i];
        const auto eq = r[1].find('=');
        if (eq == std::string::npos) {
            throw ParseError(source, line, "attenuation must be 'loss_db=X' or 'beta=Y'");
        }
        const std::string kind(trim(std::string_view(r[1]).substr(0, eq)));
        const double value = parse_double(std::string_view(r[1]).substr(eq + 1), source, line);
        const double t_phys = parse_double(r[2], source, line);
        try {
            if (kind == "loss_db") {
                chain.push_back(noise::ChainComponent::from_loss_db(value, t_phys, r[0]));
            } else if (kind == "beta") {
                noise::ChainComponent c{value, t_phys, r[0]};
                c.validate();
                chain.push_back(c);
            } else {
                throw ParseError(source, line, "unknown attenuation kind '" + kind + "'");
            }
        } catch (const DomainError& e) {
            throw ParseError(source, line, e.what());
        }
    }
    return chain;
}

noise::Chain read_chain_file(const std::string& path)
{
    auto in = open_input(path);
    return read_chain(in, path);
}

void write_chain(std::ostream& out, const noise::Chain& chain)
{
    out << "label, attenuation, t_phys_K\n";
    for (const auto& c : chain) {
        out << c.label << ", beta=" << format_double(c.beta) << ", " << format_double(c.t_phys) << '\n';
    }
}

fit::CompressionCurve read_compression(std::istream& in, const std::string& source)
{
    const Table t = read_table(in, source, compression_columns);
    fit::CompressionCurve curve;
    for (const auto& r : t.rows) {
        curve.points.push_back({dbm_to_watts(r[0]), db_to_ratio(r[1])});
    }
    try {
        curve.validate();
    } catch (const DomainError& e) {
        throw ParseError(source, 0, e.what());
    }
    return curve;
}

fit::CompressionCurve read_compression_file(const std::string& path)
{
    auto in = open_input(path);
    return read_compression(in, path);
}

void write_compression(std::ostream& out, const fit::CompressionCurve& curve)
{
    out << "p_in_dbm, gain_db\n";
    for (const auto& p : curve.points) {
        write_row(out, {watts_to_dbm(p.p_in), ratio_to_db(p.gain)});
    }
}

} // namespace maser::io
