#ifndef MASER_ERRORS_HPP
#define MASER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace maser {

/// Base of every exception thrown by the toolkit.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a formula (negative temperature, ratio <= 0, ...).
class DomainError : public Error
{
public:
    using Error::Error;
};

/// A reflection denominator or gain expression hit a pole.
class SingularityError : public Error
{
public:
    SingularityError(const std::string& what, double omega)
      : Error(what), m_omega(omega)
    {
    }

    /// Angular frequency (rad/s) at which the singularity was detected.
    double omega() const { return m_omega; }

private:
    double m_omega;
};

/// Time integration failed (step-size collapse, population excursion).
class IntegrationError : public Error
{
public:
    IntegrationError(const std::string& what, double t, double h)
      : Error(what), m_t(t), m_h(h)
    {
    }

    double time() const { return m_t; }
    double step() const { return m_h; }

private:
    double m_t;
    double m_h;
};

/// Requested operating point lies above the self-oscillation threshold.
class ThresholdExceeded : public Error
{
public:
    ThresholdExceeded(const std::string& what, double delta_n_free, double delta_n_thr)
      : Error(what), m_free(delta_n_free), m_thr(delta_n_thr)
    {
    }

    /// Inversion the pump would reach with the resonator field decoupled.
    double unclamped_delta_n() const { return m_free; }
    double threshold_delta_n() const { return m_thr; }

private:
    double m_free;
    double m_thr;
};

/// Malformed input file or configuration; carries the source location.
class ParseError : public Error
{
public:
    ParseError(const std::string& source, int line, const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message),
        m_source(source), m_line(line)
    {
    }

    const std::string& source() const { return m_source; }
    int line() const { return m_line; }

private:
    std::string m_source;
    int m_line;
};

} // namespace maser

#endif
