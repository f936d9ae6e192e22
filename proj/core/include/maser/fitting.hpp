#ifndef MASER_FITTING_HPP
#define MASER_FITTING_HPP

#include <maser/errors.hpp>

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maser::fit {

inline constexpr double unbounded = std::numeric_limits<double>::infinity();

/// Free parameter of a least-squares problem: seed value and box bounds.
struct Parameter
{
    std::string name;
    std::string unit;
    double seed = 0.0;
    double lower = -unbounded;
    double upper = unbounded;
};

/// Fills `residuals` (size Problem::residual_count) for the parameter vector.
using ResidualFunction =
    std::function<void(std::span<const double> params, std::span<double> residuals)>;

struct Problem
{
    std::vector<Parameter> parameters;
    std::size_t residual_count = 0;
    ResidualFunction residuals;
};

struct Options
{
    int max_iterations = 500;
    /// Termination when every column satisfies |J_j^T r| <= tol * |J_j| * |r|.
    double gradient_tolerance = 1e-12;
    /// Relative step-length termination.
    double step_tolerance = 1e-13;
    /// Relative decrease of the residual sum of squares.
    double residual_tolerance = 1e-16;
    /// Scaled gradient a terminated fit must reach to be flagged converged.
    double convergence_gradient = 1e-5;
    /// Central-difference step relative to |p| (absolute when p == 0).
    double jacobian_step = 1e-6;
    /// 0 makes the first trial a pure Gauss-Newton step.
    double initial_damping = 0.0;
};

enum class Termination
{
    gradient,
    step,
    residual,
    zero_residual,
    max_iterations,
};

const char* to_string(Termination t);

struct Estimate
{
    std::string name;
    std::string unit;
    double value = 0.0;
    double sigma = 0.0;
};

struct FitResult
{
    std::vector<Estimate> parameters;
    Eigen::MatrixXd covariance;
    /// Sum of squared residuals at the returned parameters.
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    /// Largest scaled gradient component at the returned parameters.
    double gradient_norm = 0.0;
    Termination termination = Termination::max_iterations;
    std::vector<std::string> warnings;

    const Estimate& at(std::string_view name) const;
    double value(std::string_view name) const { return at(name).value; }
    double sigma(std::string_view name) const { return at(name).sigma; }
    std::vector<double> values() const;
};

/// Non-converged fit; the best parameters found so far are kept.
class FitError : public Error
{
public:
    FitError(const std::string& what, FitResult best)
      : Error(what), m_best(std::move(best))
    {
    }

    const FitResult& best() const { return m_best; }

private:
    FitResult m_best;
};

/**
 * Bounded Levenberg-Marquardt minimisation of |r(p)|^2.
 *
 * Jacobians come from central differences (one-sided next to a bound), the
 * damping follows Nielsen's update on a Marquardt-scaled normal matrix and
 * trial points are projected back into the box. The result is a pure
 * function of the inputs. A seed outside its bounds throws DomainError; an
 * exhausted iteration budget returns a FitResult with converged == false.
 */
FitResult least_squares(const Problem& problem, const Options& options = {});

/// Maps parameters p_j -> offset_j + scale_j * p_j in values, sigmas and covariance.
/// Fits run in normalised coordinates and report physical ones through this.
void apply_affine(FitResult& result, const std::vector<double>& scale,
                  const std::vector<double>& offset);

/// "name: value +/- sigma unit" lines, followed by diagnostics.
std::string format_report(const FitResult& result);

} // namespace maser::fit

#endif
