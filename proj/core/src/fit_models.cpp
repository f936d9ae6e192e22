#include <maser/fit_models.hpp>

#include <maser/units.hpp>

#include <algorithm>
#include <cmath>
#include <utility>

namespace maser::fit {

double RecoveryFit::model(double t) const
{
    return y_inf - a_short * std::exp(-t / t1_short) - a_long * std::exp(-t / t1_long);
}

namespace {

struct LinearSolve
{
    Eigen::VectorXd coef;
    double ssr = 0.0;
};

// Least squares for y = c0 - sum_k c_k exp(-t / tau_k) at fixed tau.
LinearSolve solve_amplitudes(const std::vector<double>& t, const std::vector<double>& y,
                             const std::vector<double>& tau)
{
    const auto m = static_cast<Eigen::Index>(t.size());
    const auto k = static_cast<Eigen::Index>(tau.size());
    Eigen::MatrixXd a(m, k + 1);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        a(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            a(i, j + 1) = -std::exp(-t[static_cast<std::size_t>(i)] / tau[static_cast<std::size_t>(j)]);
        }
        b[i] = y[static_cast<std::size_t>(i)];
    }
    LinearSolve s;
    s.coef = a.colPivHouseholderQr().solve(b);
    s.ssr = (a * s.coef - b).squaredNorm();
    return s;
}

void swap_parameters(FitResult& r, Eigen::Index a, Eigen::Index b)
{
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);
    std::swap(r.parameters[ua].value, r.parameters[ub].value);
    std::swap(r.parameters[ua].sigma, r.parameters[ub].sigma);
    r.covariance.row(a).swap(r.covariance.row(b));
    r.covariance.col(a).swap(r.covariance.col(b));
}

} // namespace

RecoveryFit fit_biexponential(const std::vector<RecoveryPoint>& data, RecoveryMode mode)
{
    const bool dbl = mode == RecoveryMode::double_exp;
    const std::size_t n_par = dbl ? 5 : 3;
    if (data.size() < n_par + 1) {
        throw DomainError("fit_biexponential: too few points for the model");
    }
    std::vector<double> t(data.size());
    std::vector<double> y(data.size());
    double y_scale = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        t[i] = data[i].t_wait;
        if (!(t[i] > 0.0) || (i > 0 && !(t[i] > t[i - 1]))) {
            throw DomainError("fit_biexponential: wait times must be positive and increasing");
        }
        y_scale = std::max(y_scale, std::abs(data[i].echo));
    }
    if (y_scale == 0.0) {
        throw DomainError("fit_biexponential: all echo values are zero");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        y[i] = data[i].echo / y_scale;
    }

    const double u_lo = std::log(t.front()) - std::log(1e3);
    const double u_hi = std::log(t.back()) + std::log(1e3);
    const double g_lo = std::log(t.front()) - std::log(10.0);
    const double g_hi = std::log(t.back()) + std::log(10.0);
    const int grid = 48;
    auto grid_u = [&](int i) { return g_lo + (g_hi - g_lo) * i / (grid - 1); };

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_u;
    Eigen::VectorXd best_c;
    if (dbl) {
        for (int i = 0; i < grid; ++i) {
            for (int j = i + 1; j < grid; ++j) {
                const LinearSolve s = solve_amplitudes(t, y, {std::exp(grid_u(i)), std::exp(grid_u(j))});
                if (s.ssr < best) {
                    best = s.ssr;
                    best_u = {grid_u(i), grid_u(j)};
                    best_c = s.coef;
                }
            }
        }
    } else {
        for (int i = 0; i < grid; ++i) {
            const LinearSolve s = solve_amplitudes(t, y, {std::exp(grid_u(i))});
            if (s.ssr < best) {
                best = s.ssr;
                best_u = {grid_u(i)};
                best_c = s.coef;
            }
        }
    }

    Problem problem;
    problem.residual_count = t.size();
    problem.parameters = {
        {"y_inf", "", best_c[0], -unbounded, unbounded},
        {"A_S", "", best_c[1], -unbounded, unbounded},
        {"T1_S", "s", best_u[0], u_lo, u_hi},
    };
    if (dbl) {
        problem.parameters.push_back({"A_L", "", best_c[2], -unbounded, unbounded});
        problem.parameters.push_back({"T1_L", "s", best_u[1], u_lo, u_hi});
    }
    problem.residuals = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            double v = p[0] - p[1] * std::exp(-t[i] * std::exp(-p[2]));
            if (dbl) {
                v -= p[3] * std::exp(-t[i] * std::exp(-p[4]));
            }
            r[i] = v - y[i];
        }
    };
    FitResult result = least_squares(problem);

    // Back to physical units: amplitudes scale linearly, T1 = exp(u).
    const auto n = static_cast<Eigen::Index>(n_par);
    Eigen::VectorXd d(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        auto& p = result.parameters[static_cast<std::size_t>(j)];
        if (p.name.rfind("T1", 0) == 0) {
            p.value = std::exp(p.value);
            d[j] = p.value;
        } else {
            p.value *= y_scale;
            d[j] = y_scale;
        }
        p.sigma *= std::abs(d[j]);
    }
    result.covariance = d.asDiagonal() * result.covariance * d.asDiagonal();
    result.residual_norm *= y_scale * y_scale;

    RecoveryFit out;
    if (dbl && result.parameters[2].value > result.parameters[4].value) {
        swap_parameters(result, 1, 3);
        swap_parameters(result, 2, 4);
    }
    out.y_inf = result.parameters[0].value;
    out.a_short = result.parameters[1].value;
    out.t1_short = result.parameters[2].value;
    out.t1_long = out.t1_short;
    if (dbl) {
        out.a_long = result.parameters[3].value;
        out.t1_long = result.parameters[4].value;
        const double a_sum = std::abs(out.a_short) + std::abs(out.a_long);
        const bool tiny = std::min(std::abs(out.a_short), std::abs(out.a_long)) < 1e-3 * a_sum;
        const bool merged = std::log(out.t1_long / out.t1_short) < 0.05;
        // A component indistinguishable from zero, or whose time constant ran
        // to the edge of the search range, is not resolved by the data.
        bool unresolved = false;
        for (std::size_t j : {1U, 3U}) {
            const auto& a = result.parameters[j];
            const auto& tau = result.parameters[j + 1];
            unresolved = unresolved || std::abs(a.value) < 2.0 * a.sigma ||
                         std::log(tau.value) <= u_lo + 1e-9 || std::log(tau.value) >= u_hi - 1e-9;
        }
        if (tiny || merged || unresolved) {
            out.degenerate = true;
            result.warnings.emplace_back(
                "near-degenerate double-exponential fit: components not separately resolved");
        }
    }
    if (!result.converged && !out.degenerate) {
        throw FitError("fit_biexponential did not converge", std::move(result));
    }
    out.result = std::move(result);
    return out;
}

void CompressionCurve::validate() const
{
    if (points.size() < 5) {
        throw DomainError("compression curve needs at least five points");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].p_in > 0.0) || !(points[i].gain > 0.0)) {
            throw DomainError("compression curve: powers and gains must be positive");
        }
        if (i > 0 && !(points[i].p_in > points[i - 1].p_in)) {
            throw DomainError("compression curve: input powers must be strictly increasing");
        }
    }
}

double CompressionFit::gain_db(double p_in) const
{
    return g0_db - 10.0 * std::log10(1.0 + p_in / p_c);
}

CompressionFit fit_compression(const CompressionCurve& curve, const std::string& model)
{
    if (model != compression_model_single_pole) {
        throw DomainError("fit_compression: unknown model '" + model + "'");
    }
    curve.validate();
    const std::size_t m = curve.points.size();
    std::vector<double> p(m);
    std::vector<double> g_db(m);
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        p[i] = curve.points[i].p_in;
        g_db[i] = ratio_to_db(curve.points[i].gain);
        g_max = std::max(g_max, g_db[i]);
        g_min = std::min(g_min, g_db[i]);
    }
    if (g_max - g_min < 1.0) {
        throw DomainError("fit_compression: curve compresses by less than 1 dB; the knee is not spanned");
    }

    const double g0_seed = curve.small_signal_gain > 0.0 ? ratio_to_db(curve.small_signal_gain) : g_db.front();
    // Seed P_c from the most compressed point: 1 + P/P_c = 10^(drop/10).
    std::size_t i_c = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (g_db[i] < g_db[i_c]) {
            i_c = i;
        }
    }
    const double drop = std::max(g0_seed - g_db[i_c], 0.5);
    const double pc_seed = p[i_c] / (std::pow(10.0, drop / 10.0) - 1.0);

    Problem problem;
    problem.residual_count = m;
    problem.parameters = {
        {"g0_db", "dB", g0_seed, -unbounded, unbounded},
        {"log10_p_c", "log10(W)", std::log10(pc_seed), -unbounded, unbounded},
    };
    problem.residuals = [&](std::span<const double> q, std::span<double> r) {
        const double pc = std::pow(10.0, q[1]);
        for (std::size_t i = 0; i < m; ++i) {
            r[i] = q[0] - 10.0 * std::log10(1.0 + p[i] / pc) - g_db[i];
        }
    };
    FitResult result = least_squares(problem);
    if (!result.converged) {
        throw FitError("fit_compression did not converge", std::move(result));
    }

    CompressionFit out;
    out.model = model;
    out.g0_db = result.value("g0_db");
    out.g0 = db_to_ratio(out.g0_db);
    out.p_c = std::pow(10.0, result.value("log10_p_c"));
    out.p1db_in = (std::pow(10.0, 0.1) - 1.0) * out.p_c;
    out.p1db_in_dbm = watts_to_dbm(out.p1db_in);
    out.p1db_out_dbm = out.p1db_in_dbm + out.g0_db - 1.0;
    out.p1db_out = dbm_to_watts(out.p1db_out_dbm);
    out.result = std::move(result);
    return out;
}

} // namespace maser::fit
