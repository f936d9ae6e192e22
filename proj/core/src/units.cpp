#include <maser/units.hpp>

#include <maser/errors.hpp>

#include <cmath>
#include <string>

namespace maser {

namespace {

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string(name) + " must be positive and finite, got " +
                          std::to_string(value));
    }
}

} // namespace

double photon_temperature(double omega)
{
    require_positive(omega, "frequency");
    return constants::hbar * omega / constants::k_b;
}

double thermal_photons(double temperature, double omega)
{
    require_positive(temperature, "temperature");
    const double x = photon_temperature(omega) / temperature;
    // expm1 overflows to inf for x > ~709, giving the correct limit of 0
    return 1.0 / std::expm1(x);
}

double photons_to_temperature(double n, double omega)
{
    require_positive(n, "photon number");
    return photon_temperature(omega) / std::log1p(1.0 / n);
}

double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }

double ratio_to_db(double ratio)
{
    require_positive(ratio, "power ratio");
    return 10.0 * std::log10(ratio);
}

double dbm_to_watts(double dbm) { return 1e-3 * db_to_ratio(dbm); }

double watts_to_dbm(double watts)
{
    require_positive(watts, "power");
    return ratio_to_db(watts / 1e-3);
}

} // namespace maser
