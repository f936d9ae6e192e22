#ifndef MASER_UNITS_HPP
#define MASER_UNITS_HPP

#include <numbers>

namespace maser {

/*
 * Physical constants, CODATA 2018. Every formula in the toolkit works in
 * angular frequency (rad/s); cyclic Hz only appears in file and config I/O.
 */
namespace constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double k_b = 1.380649e-23;          // J/K
inline constexpr double mu0 = 1.25663706212e-6;      // T m/A
inline constexpr double gamma_e = 1.76085963023e11;  // rad/(s T), /2pi = 28.025 GHz/T

} // namespace constants

/// Angular frequency or rate in rad/s. Construct from cyclic Hz with from_hz().
struct AngularRate
{
    double value = 0.0;

    static constexpr AngularRate from_hz(double hz) { return {constants::two_pi * hz}; }
    constexpr double hz() const { return value / constants::two_pi; }
};

constexpr double hz_to_angular(double hz) { return constants::two_pi * hz; }
constexpr double angular_to_hz(double omega) { return omega / constants::two_pi; }

/// Bose-Einstein occupation n = 1/(exp(hbar w / kB T) - 1).
/// Throws DomainError for non-positive temperature or frequency.
double thermal_photons(double temperature, double omega);

/// Inverse of thermal_photons: the temperature whose occupation at omega is n.
double photons_to_temperature(double n, double omega);

/// hbar*omega/k_B in kelvin.
double photon_temperature(double omega);

double db_to_ratio(double db);
/// Throws DomainError for ratio <= 0.
double ratio_to_db(double ratio);
double dbm_to_watts(double dbm);
/// Throws DomainError for watts <= 0.
double watts_to_dbm(double watts);

} // namespace maser

#endif
