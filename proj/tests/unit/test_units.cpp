#include <maser/errors.hpp>
#include <maser/units.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace maser;

namespace {

const double w_6595 = hz_to_angular(6.595e9);

TEST(ThermalPhotons, ValueAtMinimumNoiseTemperature)
{
    EXPECT_NEAR(thermal_photons(0.86, w_6595), 2.2, 0.05);
}

TEST(ThermalPhotons, DirectBoseEvaluation)
{
    const double x = constants::hbar * w_6595 / (constants::k_b * 0.55);
    EXPECT_NEAR(thermal_photons(0.55, w_6595), 1.0 / (std::exp(x) - 1.0), 1e-12);
    EXPECT_NEAR(thermal_photons(0.55, w_6595), 1.29, 0.01);
}

TEST(ThermalPhotons, VanishesAtLowTemperature)
{
    EXPECT_LT(thermal_photons(1e-3, w_6595), 1e-100);
    EXPECT_EQ(thermal_photons(1e-6, w_6595), 0.0);
}

TEST(ThermalPhotons, RejectsNonPositiveArguments)
{
    EXPECT_THROW(thermal_photons(0.0, w_6595), DomainError);
    EXPECT_THROW(thermal_photons(-1.0, w_6595), DomainError);
    EXPECT_THROW(thermal_photons(1.0, 0.0), DomainError);
}

TEST(PhotonsToTemperature, HalfPhotonIsAboutPointThreeKelvin)
{
    EXPECT_NEAR(photons_to_temperature(0.5, w_6595), 0.29, 0.01);
}

TEST(PhotonsToTemperature, InvertsTheMinimumNoiseExample)
{
    EXPECT_NEAR(photons_to_temperature(thermal_photons(0.86, w_6595), w_6595), 0.86, 1e-12);
    // 2.2 photons sits at 0.845 K; the quoted 2.2 is a rounded occupation.
    EXPECT_NEAR(photons_to_temperature(2.2, w_6595), 0.845, 0.001);
}

TEST(PhotonsToTemperature, RejectsNonPositive)
{
    EXPECT_THROW(photons_to_temperature(0.0, w_6595), DomainError);
    EXPECT_THROW(photons_to_temperature(-0.1, w_6595), DomainError);
}

TEST(PhotonConversions, MutuallyInverse)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> log_t(-2.0, 2.0);
    std::uniform_real_distribution<double> log_f(8.0, 11.0);
    for (int i = 0; i < 2000; ++i) {
        const double t = std::pow(10.0, log_t(rng));
        const double w = hz_to_angular(std::pow(10.0, log_f(rng)));
        const double n = thermal_photons(t, w);
        if (n < 1e-250) {
            continue;
        }
        EXPECT_NEAR(photons_to_temperature(n, w) / t, 1.0, 1e-12);
        EXPECT_NEAR(thermal_photons(photons_to_temperature(n, w), w) / n, 1.0, 1e-12);
    }
}

TEST(PhotonConversions, Monotonicity)
{
    double last = 0.0;
    for (double t = 0.05; t < 10.0; t *= 1.1) {
        const double n = thermal_photons(t, w_6595);
        EXPECT_GT(n, last);
        last = n;
    }
    last = std::numeric_limits<double>::infinity();
    for (double f = 1e9; f < 1e11; f *= 1.2) {
        const double n = thermal_photons(0.5, hz_to_angular(f));
        EXPECT_LT(n, last);
        last = n;
    }
}

TEST(Decibels, Definitions)
{
    EXPECT_DOUBLE_EQ(dbm_to_watts(0.0), 1e-3);
    EXPECT_DOUBLE_EQ(db_to_ratio(20.0), 100.0);
    EXPECT_NEAR(dbm_to_watts(-58.0), 1.585e-9, 1e-12);
    EXPECT_DOUBLE_EQ(dbm_to_watts(-58.0), 1e-3 * std::pow(10.0, -5.8));
}

TEST(Decibels, RoundTrip)
{
    for (double db = -150.0; db <= 150.0; db += 0.7) {
        EXPECT_NEAR(ratio_to_db(db_to_ratio(db)), db, 1e-12);
        EXPECT_NEAR(watts_to_dbm(dbm_to_watts(db)), db, 1e-12);
    }
}

TEST(Decibels, RejectNonPositiveRatios)
{
    EXPECT_THROW(ratio_to_db(0.0), DomainError);
    EXPECT_THROW(ratio_to_db(-1.0), DomainError);
    EXPECT_THROW(watts_to_dbm(0.0), DomainError);
}

TEST(AngularRate, CyclicConversion)
{
    const auto r = AngularRate::from_hz(1.0);
    EXPECT_DOUBLE_EQ(r.value, constants::two_pi);
    EXPECT_DOUBLE_EQ(r.hz(), 1.0);
    EXPECT_NEAR(constants::gamma_e / constants::two_pi, 28.025e9, 1e6);
}

} // namespace
