#include <maser/fitting.hpp>

#include <maser/text.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maser::fit {

const char* to_string(Termination t)
{
    switch (t) {
    case Termination::gradient: return "gradient";
    case Termination::step: return "step";
    case Termination::residual: return "residual";
    case Termination::zero_residual: return "zero-residual";
    case Termination::max_iterations: return "max-iterations";
    }
    return "unknown";
}

const Estimate& FitResult::at(std::string_view name) const
{
    for (const auto& p : parameters) {
        if (p.name == name) {
            return p;
        }
    }
    throw DomainError("fit result has no parameter '" + std::string(name) + "'");
}

std::vector<double> FitResult::values() const
{
    std::vector<double> out;
    out.reserve(parameters.size());
    for (const auto& p : parameters) {
        out.push_back(p.value);
    }
    return out;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Engine
{
public:
    Engine(const Problem& problem, const Options& options)
      : m_problem(problem), m_opt(options), m_n(problem.parameters.size()),
        m_m(problem.residual_count), m_lower(m_n), m_upper(m_n)
    {
        for (std::size_t j = 0; j < m_n; ++j) {
            m_lower[j] = problem.parameters[j].lower;
            m_upper[j] = problem.parameters[j].upper;
        }
    }

    VectorXd residuals(const VectorXd& p) const
    {
        VectorXd r(m_m);
        m_problem.residuals(std::span<const double>(p.data(), m_n),
                            std::span<double>(r.data(), m_m));
        return r;
    }

    MatrixXd jacobian(const VectorXd& p) const
    {
        MatrixXd jac(m_m, m_n);
        VectorXd work = p;
        for (std::size_t j = 0; j < m_n; ++j) {
            const double scale = p[j] != 0.0 ? std::abs(p[j]) : 1.0;
            const double h = m_opt.jacobian_step * scale;
            const bool room_up = p[j] + h <= m_upper[j];
            const bool room_down = p[j] - h >= m_lower[j];
            if (room_up && room_down) {
                work[j] = p[j] + h;
                const VectorXd rp = residuals(work);
                work[j] = p[j] - h;
                const VectorXd rm = residuals(work);
                jac.col(j) = (rp - rm) / (2.0 * h);
            } else {
                const double hs = room_up ? h : -h;
                work[j] = p[j] + hs;
                const VectorXd rp = residuals(work);
                work[j] = p[j];
                const VectorXd r0 = residuals(work);
                jac.col(j) = (rp - r0) / hs;
            }
            work[j] = p[j];
        }
        return jac;
    }

    VectorXd project(VectorXd p) const
    {
        for (std::size_t j = 0; j < m_n; ++j) {
            p[j] = std::clamp(p[j], m_lower[j], m_upper[j]);
        }
        return p;
    }

    // Largest |J_j^T r| / (|J_j| |r|) over columns not pinned at an active bound.
    double scaled_gradient(const MatrixXd& jac, const VectorXd& r, const VectorXd& p) const
    {
        const double rn = r.norm();
        if (rn == 0.0) {
            return 0.0;
        }
        const VectorXd g = jac.transpose() * r;
        double worst = 0.0;
        for (std::size_t j = 0; j < m_n; ++j) {
            const double cn = jac.col(j).norm();
            if (cn == 0.0) {
                continue;
            }
            if (p[j] <= m_lower[j] && g[j] > 0.0) {
                continue;
            }
            if (p[j] >= m_upper[j] && g[j] < 0.0) {
                continue;
            }
            worst = std::max(worst, std::abs(g[j]) / (cn * rn));
        }
        return worst;
    }

    // Parameters held at a bound because the descent direction points outward.
    std::vector<Eigen::Index> free_indices(const VectorXd& grad, const VectorXd& p) const
    {
        std::vector<Eigen::Index> free;
        for (std::size_t j = 0; j < m_n; ++j) {
            const auto i = static_cast<Eigen::Index>(j);
            const bool pinned = (p[i] <= m_lower[i] && grad[i] > 0.0) || (p[i] >= m_upper[i] && grad[i] < 0.0);
            if (!pinned) {
                free.push_back(i);
            }
        }
        return free;
    }

    // Undamped step over the free parameters, projected into the box.
    VectorXd gauss_newton_step(const MatrixXd& jac, const VectorXd& r, const VectorXd& p) const
    {
        const auto free = free_indices(jac.transpose() * r, p);
        MatrixXd jf(jac.rows(), static_cast<Eigen::Index>(free.size()));
        for (std::size_t a = 0; a < free.size(); ++a) {
            jf.col(static_cast<Eigen::Index>(a)) = jac.col(free[a]);
        }
        const VectorXd reduced = jf.completeOrthogonalDecomposition().solve(-r);
        VectorXd full = p;
        for (std::size_t a = 0; a < free.size(); ++a) {
            full[free[a]] += reduced[static_cast<Eigen::Index>(a)];
        }
        return project(full) - p;
    }

    std::size_t n() const { return m_n; }
    std::size_t m() const { return m_m; }
    const Options& options() const { return m_opt; }

private:
    const Problem& m_problem;
    const Options& m_opt;
    std::size_t m_n;
    std::size_t m_m;
    VectorXd m_lower;
    VectorXd m_upper;
};

MatrixXd covariance_from(const MatrixXd& jac, double ssr, std::size_t m,
                         std::vector<std::string>& warnings)
{
    const std::size_t n = static_cast<std::size_t>(jac.cols());
    const MatrixXd normal = jac.transpose() * jac;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(normal);
    const VectorXd& lambda = eig.eigenvalues();
    const double cutoff = lambda.cwiseAbs().maxCoeff() * 1e-14;
    VectorXd inv = VectorXd::Zero(static_cast<Eigen::Index>(n));
    bool deficient = false;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (lambda[k] > cutoff && lambda[k] > 0.0) {
            inv[k] = 1.0 / lambda[k];
        } else {
            deficient = true;
        }
    }
    if (deficient) {
        warnings.emplace_back("covariance is rank-deficient; unresolved directions reported as zero");
    }
    const double dof = m > n ? static_cast<double>(m - n) : 1.0;
    const double sigma2 = ssr / dof;
    return sigma2 * eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace

FitResult least_squares(const Problem& problem, const Options& options)
{
    const std::size_t n = problem.parameters.size();
    if (n == 0) {
        throw DomainError("least_squares: no free parameters");
    }
    if (problem.residual_count == 0 || !problem.residuals) {
        throw DomainError("least_squares: empty residual function");
    }
    VectorXd p(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        const auto& par = problem.parameters[j];
        if (!(par.lower <= par.upper)) {
            throw DomainError("least_squares: inverted bounds for '" + par.name + "'");
        }
        if (!(par.seed >= par.lower && par.seed <= par.upper) || !std::isfinite(par.seed)) {
            throw DomainError("least_squares: seed of '" + par.name + "' lies outside its bounds");
        }
        p[static_cast<Eigen::Index>(j)] = par.seed;
    }

    Engine engine(problem, options);
    VectorXd r = engine.residuals(p);
    if (!r.allFinite()) {
        throw DomainError("least_squares: residuals are not finite at the seed");
    }
    double ssr = r.squaredNorm();

    double lambda = options.initial_damping;
    double nu = 2.0;
    int iter = 0;
    Termination reason = Termination::max_iterations;
    MatrixXd jac = engine.jacobian(p);

    while (iter < options.max_iterations) {
        if (ssr == 0.0) {
            reason = Termination::zero_residual;
            break;
        }
        if (engine.scaled_gradient(jac, r, p) <= options.gradient_tolerance) {
            reason = Termination::gradient;
            break;
        }
        ++iter;

        const MatrixXd normal = jac.transpose() * jac;
        const VectorXd grad = jac.transpose() * r;
        VectorXd diag = normal.diagonal();
        const double diag_floor = std::max(diag.maxCoeff(), 1e-300) * 1e-12;
        for (Eigen::Index j = 0; j < diag.size(); ++j) {
            diag[j] = std::max(diag[j], diag_floor);
        }

        bool accepted = false;
        VectorXd step;
        double ssr_new = ssr;
        VectorXd p_new;
        VectorXd r_new;
        const auto free = engine.free_indices(grad, p);
        const auto nf = static_cast<Eigen::Index>(free.size());
        for (int attempt = 0; attempt < 60; ++attempt) {
            MatrixXd damped(nf, nf);
            VectorXd rhs(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                rhs[a] = -grad[free[static_cast<std::size_t>(a)]];
                for (Eigen::Index b = 0; b < nf; ++b) {
                    damped(a, b) = normal(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
                }
                damped(a, a) += lambda * diag[free[static_cast<std::size_t>(a)]];
            }
            const VectorXd reduced = damped.ldlt().solve(rhs);
            VectorXd delta = VectorXd::Zero(static_cast<Eigen::Index>(n));
            for (Eigen::Index a = 0; a < nf; ++a) {
                delta[free[static_cast<std::size_t>(a)]] = reduced[a];
            }
            if (!delta.allFinite()) {
                lambda = lambda > 0.0 ? lambda * nu : 1e-3;
                nu *= 2.0;
                continue;
            }
            p_new = engine.project(p + delta);
            step = p_new - p;
            r_new = engine.residuals(p_new);
            ssr_new = r_new.allFinite() ? r_new.squaredNorm()
                                        : std::numeric_limits<double>::infinity();
            const double predicted = -(2.0 * step.dot(grad) + step.dot(normal * step));
            if (ssr_new < ssr) {
                const double rho = predicted > 0.0 ? (ssr - ssr_new) / predicted : 1.0;
                lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                nu = 2.0;
                accepted = true;
                break;
            }
            lambda = lambda > 0.0 ? lambda * nu : 1e-3;
            nu *= 2.0;
            if (step.norm() <= options.step_tolerance * (p.norm() + options.step_tolerance)) {
                break;
            }
        }

        if (!accepted) {
            reason = Termination::step;
            break;
        }

        const double decrease = ssr - ssr_new;
        p = p_new;
        r = r_new;
        ssr = ssr_new;
        jac = engine.jacobian(p);

        if (step.norm() <= options.step_tolerance * (p.norm() + options.step_tolerance)) {
            reason = Termination::step;
            break;
        }
        if (decrease <= options.residual_tolerance * (ssr + decrease)) {
            reason = Termination::residual;
            break;
        }
    }

    FitResult result;
    result.iterations = iter;
    result.residual_norm = ssr;
    result.termination = reason;
    result.gradient_norm = engine.scaled_gradient(jac, r, p);
    // At round-off level residuals the gradient cosine is noise; a negligible
    // Gauss-Newton step then certifies the stationary point instead.
    result.converged = reason != Termination::max_iterations &&
                       (result.gradient_norm <= options.convergence_gradient ||
                        engine.gauss_newton_step(jac, r, p).norm() <= 1e-8 * (p.norm() + 1e-8));
    if (reason != Termination::max_iterations && !result.converged) {
        result.warnings.emplace_back("terminated by " + std::string(to_string(reason)) +
                                     " test with a non-negligible gradient");
    }
    result.covariance = covariance_from(jac, ssr, engine.m(), result.warnings);
    for (std::size_t j = 0; j < n; ++j) {
        const auto idx = static_cast<Eigen::Index>(j);
        const auto& par = problem.parameters[j];
        if (p[idx] <= par.lower || p[idx] >= par.upper) {
            result.warnings.push_back("parameter '" + par.name + "' finished on a bound");
        }
        result.parameters.push_back(
            {par.name, par.unit, p[idx], std::sqrt(std::max(result.covariance(idx, idx), 0.0))});
    }
    return result;
}

void apply_affine(FitResult& result, const std::vector<double>& scale,
                  const std::vector<double>& offset)
{
    const std::size_t n = result.parameters.size();
    if (scale.size() != n || offset.size() != n) {
        throw DomainError("apply_affine: size mismatch");
    }
    Eigen::VectorXd d(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        auto& p = result.parameters[j];
        p.value = offset[j] + scale[j] * p.value;
        p.sigma *= std::abs(scale[j]);
        d[static_cast<Eigen::Index>(j)] = scale[j];
    }
    if (result.covariance.rows() == static_cast<Eigen::Index>(n)) {
        result.covariance = d.asDiagonal() * result.covariance * d.asDiagonal();
    }
}

std::string format_report(const FitResult& result)
{
    std::ostringstream out;
    for (const auto& p : result.parameters) {
        out << p.name << ": " << io::format_double(p.value) << " +/- "
            << io::format_double(p.sigma);
        if (!p.unit.empty()) {
            out << ' ' << p.unit;
        }
        out << '\n';
    }
    out << "residual_norm: " << io::format_double(result.residual_norm) << '\n';
    out << "converged: " << (result.converged ? "yes" : "no") << '\n';
    out << "iterations: " << result.iterations << '\n';
    out << "termination: " << to_string(result.termination) << '\n';
    for (const auto& w : result.warnings) {
        out << "warning: " << w << '\n';
    }
    return out.str();
}

} // namespace maser::fit
