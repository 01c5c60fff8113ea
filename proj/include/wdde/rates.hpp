#pragma once

#include "wdde/dependence_bound.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace wdde {

/// Which convergence result a rate refers to.
///   T1            pointwise L^q error
///   T2            uniform error, geometric decay
///   T3Mean        uniform L^q error, Riemannian decay
///   T3AlmostSure  uniform almost-sure error, Riemannian decay
enum class Theorem { T1, T2, T3Mean, T3AlmostSure };

std::string to_string(Theorem theorem);
Theorem theorem_from_string(const std::string& name);

struct RateParams
{
    double rho = 2.0; // regularity of f
    int d = 1;
    DependenceBound decay;
    int q = 2; // moment order of the error
    Theorem theorem = Theorem::T1;

    bool operator==(const RateParams&) const = default;
};

/// m_n = max(1, round((n^num_power / ln(n)^log_power)^exponent)).
///
/// Equivalently m_n = n^delta ln(n)^gamma before rounding, with
/// delta = num_power * exponent and gamma = -log_power * exponent.
struct BandwidthRule
{
    double num_power = 1.0;
    double log_power = 0.0;
    double exponent = 0.2;

    double delta() const noexcept { return num_power * exponent; }
    double gamma() const noexcept { return -log_power * exponent; }

    /// Unrounded bandwidth.
    double raw(std::size_t n) const;

    /// Rounded and clamped bandwidth index, n >= 2.
    int operator()(std::size_t n) const;
};

struct RateResult
{
    double exponent = 0.0;  // error ~ n^-exponent up to logs
    double log_power = 0.0; // power of log n in the rate
    BandwidthRule bandwidth;
};

/// q0 = 2 ceil((a - 1) / 2), the even integer with a - 1 <= q0 < a + 1.
int q0_of(double a);

/// Rate exponent and optimal bandwidth rule of the selected theorem.
/// Throws HypothesisError when the theorem's stated hypotheses fail.
RateResult rate_exponent(const RateParams& params);

/// Optimal bandwidth index m*_n for n >= 2.
int optimal_bandwidth(const RateParams& params, std::size_t n);

struct Hypothesis
{
    std::string name;
    std::string relation; // how value compares to threshold: ">", ">=", "<=" or "holds"
    double threshold = 0.0;
    double value = 0.0;
    bool satisfied = false;
    bool from_theorem = true; // false for the auxiliary moment-inequality condition
};

struct AdmissibilityReport
{
    std::vector<Hypothesis> hypotheses;
    bool admissible = true;

    std::string to_text() const;
};

/// Every hypothesis relevant to `params` with its numeric threshold, the
/// supplied value and an overall verdict. Never throws.
AdmissibilityReport check_admissibility(const RateParams& params);

} // namespace wdde
