#include <maser/errors.hpp>
#include <maser/fitting.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace maser;
using namespace maser::fit;

namespace {

Problem line_problem(const std::vector<double>& x, const std::vector<double>& y)
{
    Problem p;
    p.parameters = {{"a", "", 0.0}, {"b", "", 0.0}};
    p.residual_count = x.size();
    p.residuals = [x, y](std::span<const double> q, std::span<double> r) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            r[i] = q[0] + q[1] * x[i] - y[i];
        }
    };
    return p;
}

Problem rosenbrock(double x0, double y0)
{
    Problem p;
    p.parameters = {{"x", "", x0}, {"y", "", y0}};
    p.residual_count = 2;
    p.residuals = [](std::span<const double> q, std::span<double> r) {
        r[0] = 10.0 * (q[1] - q[0] * q[0]);
        r[1] = 1.0 - q[0];
    };
    return p;
}

TEST(LeastSquares, LinearModelInOneStep)
{
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(i);
        y.push_back(3.0 - 0.5 * i);
    }
    const auto r = least_squares(line_problem(x, y));
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value("a"), 3.0, 1e-10);
    EXPECT_NEAR(r.value("b"), -0.5, 1e-10);
    EXPECT_LT(r.residual_norm, 1e-20);
    EXPECT_LE(r.iterations, 2);
}

TEST(LeastSquares, LinearCovarianceMatchesNormalEquations)
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 0.1);
    std::vector<double> x, y;
    for (int i = 0; i < 30; ++i) {
        x.push_back(0.1 * i);
        y.push_back(1.0 + 2.0 * x.back() + n(rng));
    }
    const auto r = least_squares(line_problem(x, y));
    Eigen::MatrixXd a(30, 2);
    Eigen::VectorXd b(30);
    for (int i = 0; i < 30; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = x[static_cast<std::size_t>(i)];
        b(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
    const double s2 = (a * sol - b).squaredNorm() / 28.0;
    const Eigen::MatrixXd cov = s2 * (a.transpose() * a).inverse();
    EXPECT_NEAR(r.value("a"), sol(0), 1e-9);
    EXPECT_NEAR(r.value("b"), sol(1), 1e-9);
    EXPECT_NEAR(r.sigma("a"), std::sqrt(cov(0, 0)), 1e-6 * std::sqrt(cov(0, 0)));
    EXPECT_NEAR(r.covariance(0, 1), cov(0, 1), 1e-6 * std::abs(cov(0, 1)));
}

TEST(LeastSquares, RosenbrockValley)
{
    const auto r = least_squares(rosenbrock(-1.2, 1.0));
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value("x"), 1.0, 1e-8);
    EXPECT_NEAR(r.value("y"), 1.0, 1e-8);
}

TEST(LeastSquares, BoundIsRespected)
{
    auto p = rosenbrock(0.0, 0.0);
    p.parameters[0].upper = 0.5;
    const auto r = least_squares(p);
    EXPECT_LE(r.value("x"), 0.5);
    EXPECT_NEAR(r.value("x"), 0.5, 1e-8);
    EXPECT_NEAR(r.value("y"), 0.25, 1e-6);
}

TEST(LeastSquares, SeedOutsideBounds)
{
    auto p = rosenbrock(2.0, 0.0);
    p.parameters[0].upper = 1.5;
    EXPECT_THROW(least_squares(p), DomainError);
}

TEST(LeastSquares, Deterministic)
{
    const auto a = least_squares(rosenbrock(-1.2, 1.0));
    const auto b = least_squares(rosenbrock(-1.2, 1.0));
    EXPECT_EQ(a.values(), b.values());
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(format_report(a), format_report(b));
}

TEST(LeastSquares, BudgetExhaustionIsReported)
{
    Options o;
    o.max_iterations = 2;
    const auto r = least_squares(rosenbrock(-1.2, 1.0), o);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.termination, Termination::max_iterations);
}

TEST(LeastSquares, UnknownParameterName)
{
    const auto r = least_squares(rosenbrock(-1.2, 1.0));
    EXPECT_THROW(r.at("nope"), DomainError);
}

TEST(ApplyAffine, MapsValuesSigmasAndCovariance)
{
    FitResult r;
    r.parameters = {{"p", "", 2.0, 0.1}, {"q", "", -1.0, 0.2}};
    r.covariance.resize(2, 2);
    r.covariance << 0.01, 0.005, 0.005, 0.04;
    apply_affine(r, {3.0, -2.0}, {1.0, 0.0});
    EXPECT_DOUBLE_EQ(r.value("p"), 7.0);
    EXPECT_DOUBLE_EQ(r.value("q"), 2.0);
    EXPECT_DOUBLE_EQ(r.sigma("p"), 0.3);
    EXPECT_DOUBLE_EQ(r.sigma("q"), 0.4);
    EXPECT_DOUBLE_EQ(r.covariance(0, 1), -0.03);
    EXPECT_DOUBLE_EQ(r.covariance(1, 1), 0.16);
}

TEST(FormatReport, ContainsEstimatesAndDiagnostics)
{
    const auto r = least_squares(rosenbrock(-1.2, 1.0));
    const std::string text = format_report(r);
    EXPECT_NE(text.find("x: "), std::string::npos);
    EXPECT_NE(text.find("iterations: "), std::string::npos);
}

} // namespace
