#include <maser/errors.hpp>
#include <maser/noisechain.hpp>
#include <maser/units.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace maser;
using namespace maser::noise;
using maser::testing::rel;

namespace {

const double w = hz_to_angular(6.595e9);

Chain random_chain(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Chain c;
    const int len = 1 + static_cast<int>(6 * u(rng));
    for (int i = 0; i < len; ++i) {
        c.push_back({0.01 + 0.99 * u(rng), 0.01 + 5.0 * u(rng), "c" + std::to_string(i)});
    }
    return c;
}

TEST(Chain, FromLossDecibels)
{
    const auto c = ChainComponent::from_loss_db(3.0, 0.013, "x");
    EXPECT_NEAR(c.beta, std::pow(10.0, -0.3), 1e-15);
    EXPECT_EQ(ChainComponent::from_loss_db(0.0, 1.0, "y").beta, 1.0);
    EXPECT_THROW(ChainComponent::from_loss_db(-1.0, 1.0, "z"), DomainError);
    EXPECT_THROW((ChainComponent{0.0, 1.0, "b"}.validate()), DomainError);
    EXPECT_THROW((ChainComponent{1.1, 1.0, "b"}.validate()), DomainError);
}

TEST(Chain, SingleBeamSplitter)
{
    const Chain c{{0.25, 1.0, "a"}};
    EXPECT_NEAR(propagate_occupation(4.0, c, w), 0.25 * 4.0 + 0.75 * thermal_photons(1.0, w), 1e-14);
}

TEST(Chain, OutputsInConvexHull)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const Chain c = random_chain(rng);
        const double n_in = 10.0 * u(rng);
        double lo = n_in;
        double hi = n_in;
        for (const auto& comp : c) {
            const double n = thermal_photons(comp.t_phys, w);
            lo = std::min(lo, n);
            hi = std::max(hi, n);
        }
        const double out = propagate_occupation(n_in, c, w);
        EXPECT_GE(out, lo * (1 - 1e-12));
        EXPECT_LE(out, hi * (1 + 1e-12));
    }
}

TEST(Chain, Associative)
{
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        const Chain c = random_chain(rng);
        const double whole = propagate_occupation(1.7, c, w);
        for (std::size_t cut = 0; cut <= c.size(); ++cut) {
            const Chain a(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(cut));
            const Chain b(c.begin() + static_cast<std::ptrdiff_t>(cut), c.end());
            EXPECT_NEAR(propagate_occupation(propagate_occupation(1.7, a, w), b, w), whole, 1e-13);
        }
    }
}

TEST(Chain, IdentityAndEquilibrium)
{
    EXPECT_EQ(corrected_input_temperature(0.7, {}, w), 0.7);
    EXPECT_EQ(corrected_input_temperature(0.7, Chain{{1.0, 4.0, "lossless"}}, w), 0.7);
    // A lossy element in equilibrium with the source changes nothing.
    EXPECT_NEAR(corrected_input_temperature(0.7, Chain{{0.3, 0.7, "warm"}}, w), 0.7, 1e-12);
}

TEST(Chain, ColdAttenuationCoolsTheSource)
{
    const Chain c{ChainComponent::from_loss_db(1.26, 0.013, "channel"),
                  ChainComponent::from_loss_db(switch_loss_db, 0.013, "switch")};
    const double t = corrected_input_temperature(2.0, c, w);
    EXPECT_LT(t, 2.0);
    EXPECT_GT(t, 0.013);
}

NoiseSweep synthetic_sweep(double t_sys, double gain, double bandwidth, double noise, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    NoiseSweep s;
    s.bandwidth = bandwidth;
    for (int i = 0; i < 20; ++i) {
        const double t = 0.05 + 0.3 * i;
        const double p = gain * constants::k_b * bandwidth * (t + t_sys);
        s.points.push_back({t, p * (1.0 + noise * n(rng))});
    }
    return s;
}

TEST(SweepFit, NoiselessRecovery)
{
    const auto s = synthetic_sweep(0.902, 1e7, 1e6, 0.0, 1);
    const auto f = fit_noise_sweep(s);
    EXPECT_LT(rel(f.t_sys, 0.902), 1e-10);
    EXPECT_LT(rel(f.gain, 1e7), 1e-10);
    EXPECT_LT(rel(fit_noise_sweep(s, 100.0).gain, 1e5), 1e-10);
}

TEST(SweepFit, MonteCarloWithinFivePercent)
{
    int ok = 0;
    int covered = 0;
    const int draws = 200;
    for (int i = 0; i < draws; ++i) {
        const auto f = fit_noise_sweep(synthetic_sweep(4.19, 1e5, 1e6, 0.01, 100 + i), 1.0);
        ok += rel(f.t_sys, 4.19) < 0.05 ? 1 : 0;
        covered += std::abs(f.t_sys - 4.19) < 2.0 * f.t_sys_sigma ? 1 : 0;
    }
    EXPECT_GE(ok, 190);
    // Two-sigma coverage should be near 95 %.
    EXPECT_GT(covered, 170);
}

TEST(SweepFit, Errors)
{
    NoiseSweep s;
    s.bandwidth = 1.0;
    s.points = {{1.0, 1.0}, {1.0, 2.0}, {1.0, 3.0}};
    EXPECT_THROW(fit_noise_sweep(s), DomainError);
    s.points = {{1.0, 1.0}, {2.0, 2.0}};
    EXPECT_THROW(fit_noise_sweep(s), DomainError);
    s.points = {{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}};
    EXPECT_THROW(fit_noise_sweep(s, 0.0), DomainError);
}

TEST(MaserNoise, SubtractsFollowingStage)
{
    const auto m = maser_noise_from_system(0.902, 4.19, db_to_ratio(20.0));
    EXPECT_NEAR(m.t_maser, 0.860, 0.005);
    EXPECT_TRUE(m.warnings.empty());
    EXPECT_FALSE(maser_noise_from_system(0.01, 4.19, 10.0).warnings.empty());
}

TEST(Cascade, InverseStackReproducesSystemTemperature)
{
    const auto m = maser_noise_from_system(0.902, 4.19, 100.0);
    const double t = cascade_noise({{100.0, m.t_maser}, {1e4, 4.19}});
    EXPECT_NEAR(t, 0.902, 0.005);
    EXPECT_NEAR(t, 0.902, 1e-12);
}

TEST(Cascade, Friis)
{
    EXPECT_DOUBLE_EQ(cascade_noise({{10.0, 1.0}, {5.0, 20.0}, {2.0, 100.0}}), 1.0 + 20.0 / 10.0 + 100.0 / 50.0);
    EXPECT_THROW(cascade_noise({}), DomainError);
    EXPECT_THROW(cascade_noise({{0.0, 1.0}}), DomainError);
}

} // namespace
