#ifndef MASER_IO_HPP
#define MASER_IO_HPP

#include <maser/dynamics.hpp>
#include <maser/fit_models.hpp>
#include <maser/noisechain.hpp>
#include <maser/resonator.hpp>
#include <maser/text.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace maser::io {

/*
 * All data files are comma-delimited text. Lines starting with '#' are
 * comments, "key = value" lines before the column header are header fields,
 * and the first other line is the column header. Frequencies are cyclic Hz on
 * disk and angular in memory.
 */

struct Table
{
    std::string source;
    std::vector<std::pair<std::string, std::string>> fields;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    /// Source line of every row, for error messages.
    std::vector<int> lines;

    std::optional<std::string> field(const std::string& key) const;
};

/// Reads a table whose header must begin with `required` (extra trailing columns allowed
/// only when `allow_extra`). Throws ParseError with the offending line.
Table read_table(std::istream& in, const std::string& source, const std::vector<std::string>& required,
                 bool allow_extra = false);

/// Comment lines written at the top of every output file.
struct Provenance
{
    std::string command;
    std::string config_hash;
    /// Omitted with --no-meta so that outputs are byte-identical across runs.
    std::string timestamp;
    std::vector<std::pair<std::string, std::string>> extra;
};

void write_provenance(std::ostream& out, const Provenance& provenance);

/// FNV-1a 64-bit hash as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

ComplexSpectrum read_spectrum(std::istream& in, const std::string& source);
ComplexSpectrum read_spectrum_file(const std::string& path);
/// `gain_db`, when given, becomes a fourth column of the same length.
void write_spectrum(std::ostream& out, const ComplexSpectrum& spectrum,
                    const std::vector<double>* gain_db = nullptr);

TimeSeries read_time_series(std::istream& in, const std::string& source);
void write_time_series(std::ostream& out, const TimeSeries& series);

noise::NoiseSweep read_noise_sweep(std::istream& in, const std::string& source);
noise::NoiseSweep read_noise_sweep_file(const std::string& path);
void write_noise_sweep(std::ostream& out, const noise::NoiseSweep& sweep);

/// Rows "label, loss_db=X | beta=Y, t_phys_K".
noise::Chain read_chain(std::istream& in, const std::string& source);
noise::Chain read_chain_file(const std::string& path);
void write_chain(std::ostream& out, const noise::Chain& chain);

/// Rows "p_in_dbm, gain_db".
fit::CompressionCurve read_compression(std::istream& in, const std::string& source);
fit::CompressionCurve read_compression_file(const std::string& path);
void write_compression(std::ostream& out, const fit::CompressionCurve& curve);

} // namespace maser::io

#endif
