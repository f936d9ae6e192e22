#include <maser/errors.hpp>
#include <maser/fit_models.hpp>
#include <maser/units.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace maser;
using namespace maser::fit;
using maser::testing::rel;

namespace {

std::vector<RecoveryPoint> recovery(double y_inf, double a_s, double t_s, double a_l, double t_l, double noise = 0.0,
                                    std::uint64_t seed = 1)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, noise);
    std::vector<RecoveryPoint> out;
    for (int i = 0; i < 40; ++i) {
        const double t = std::pow(10.0, 0.0 + 4.3 * i / 39.0);
        double y = y_inf - a_s * std::exp(-t / t_s) - a_l * std::exp(-t / t_l);
        if (noise > 0.0) {
            y += y_inf * n(rng);
        }
        out.push_back({t, y});
    }
    return out;
}

TEST(Biexponential, NoiselessFixedPoint)
{
    const auto d = recovery(1.0, 0.4, 30.0, 0.5, 1650.0);
    const auto f = fit_biexponential(d, RecoveryMode::double_exp);
    EXPECT_FALSE(f.degenerate);
    EXPECT_LT(f.result.residual_norm, 1e-10);
    EXPECT_LT(rel(f.t1_short, 30.0), 1e-6);
    EXPECT_LT(rel(f.t1_long, 1650.0), 1e-6);
    EXPECT_LT(rel(f.a_short, 0.4), 1e-6);
    EXPECT_LT(rel(f.a_long, 0.5), 1e-6);
    for (const auto& p : d) {
        EXPECT_NEAR(f.model(p.t_wait), p.echo, 1e-7);
    }
}

TEST(Biexponential, OrderedTimeConstantsRegardlessOfLabels)
{
    const auto f = fit_biexponential(recovery(1.0, 0.5, 1650.0, 0.4, 30.0), RecoveryMode::double_exp);
    EXPECT_LE(f.t1_short, f.t1_long);
    EXPECT_LT(rel(f.t1_short, 30.0), 1e-6);
    EXPECT_LT(rel(f.a_long, 0.5), 1e-6);
    EXPECT_LE(f.result.value("T1_S"), f.result.value("T1_L"));
}

TEST(Biexponential, SmallNoiseWithinTwoPercent)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto f = fit_biexponential(recovery(1.0, 0.4, 30.0, 0.5, 1650.0, 0.001, seed), RecoveryMode::double_exp);
        EXPECT_LT(rel(f.t1_short, 30.0), 0.02);
        EXPECT_LT(rel(f.t1_long, 1650.0), 0.02);
    }
}

TEST(Biexponential, SingleExponential)
{
    const auto f = fit_biexponential(recovery(2.0, 1.5, 1658.0, 0.0, 1.0), RecoveryMode::single);
    EXPECT_LT(rel(f.t1_short, 1658.0), 1e-8);
    EXPECT_EQ(f.a_long, 0.0);
    EXPECT_EQ(f.t1_long, f.t1_short);
    EXPECT_LT(f.result.residual_norm, 1e-10);
}

TEST(Biexponential, DegenerateWhenOneComponentVanishes)
{
    const auto f = fit_biexponential(recovery(1.0, 0.9, 500.0, 0.0, 1.0, 1e-4, 3), RecoveryMode::double_exp);
    EXPECT_TRUE(f.degenerate);
    EXPECT_FALSE(f.result.warnings.empty());
}

TEST(Biexponential, InputValidation)
{
    EXPECT_THROW(fit_biexponential({{1.0, 1.0}, {2.0, 1.0}}, RecoveryMode::double_exp), DomainError);
    auto d = recovery(1.0, 0.4, 30.0, 0.5, 1650.0);
    std::swap(d[3], d[4]);
    EXPECT_THROW(fit_biexponential(d, RecoveryMode::double_exp), DomainError);
}

CompressionCurve curve(double g0_db, double p1db_in_dbm, double noise_db = 0.0, std::uint64_t seed = 1)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, noise_db);
    const double p_c = dbm_to_watts(p1db_in_dbm) / (std::pow(10.0, 0.1) - 1.0);
    CompressionCurve c;
    for (double dbm = p1db_in_dbm - 30.0; dbm <= p1db_in_dbm + 15.0; dbm += 1.0) {
        const double p = dbm_to_watts(dbm);
        double g_db = g0_db - 10.0 * std::log10(1.0 + p / p_c);
        if (noise_db > 0.0) {
            g_db += n(rng);
        }
        c.points.push_back({p, db_to_ratio(g_db)});
    }
    return c;
}

TEST(Compression, NoiselessFixedPoint)
{
    const auto f = fit_compression(curve(20.0, -85.0));
    EXPECT_NEAR(f.g0_db, 20.0, 1e-8);
    EXPECT_NEAR(f.p1db_in_dbm, -85.0, 1e-8);
    EXPECT_LT(f.result.residual_norm, 1e-10);
    EXPECT_EQ(f.model, "single-pole");
    EXPECT_NEAR(f.gain_db(dbm_to_watts(-85.0)), 19.0, 1e-8);
}

TEST(Compression, OneDecibelIdentity)
{
    for (double g : {10.0, 20.0, 33.3}) {
        const auto f = fit_compression(curve(g, -70.0, 0.05, 7));
        EXPECT_NEAR(f.p1db_out_dbm - f.p1db_in_dbm, f.g0_db - 1.0, 1e-12);
        EXPECT_LT(rel(f.p1db_out, f.p1db_in * db_to_ratio(f.g0_db - 1.0)), 1e-12);
    }
}

TEST(Compression, NoisyRecovery)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto f = fit_compression(curve(20.0, -85.0, 0.04, seed));
        EXPECT_NEAR(f.g0_db, 20.0, 0.1);
        EXPECT_NEAR(f.p1db_in_dbm, -85.0, 0.5);
    }
}

TEST(Compression, Errors)
{
    auto c = curve(20.0, -85.0);
    c.points.resize(10); // stops 20 dB below the knee
    EXPECT_THROW(fit_compression(c), DomainError);
    EXPECT_THROW(fit_compression(curve(20.0, -85.0), "tanh"), DomainError);
    CompressionCurve tiny;
    tiny.points = {{1e-9, 10.0}, {2e-9, 9.0}};
    EXPECT_THROW(fit_compression(tiny), DomainError);
}

} // namespace
