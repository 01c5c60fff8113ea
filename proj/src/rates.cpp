#include "wdde/rates.hpp"

#include "wdde/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace wdde {

namespace {

const char* coefficient_name(DependenceCoefficient c)
{
    return c == DependenceCoefficient::Eta ? "eta" : "phi~";
}

Hypothesis greater(std::string name, double value, double threshold, bool from_theorem = true)
{
    return Hypothesis{std::move(name), ">", threshold, value, value > threshold, from_theorem};
}

Hypothesis at_least(std::string name, double value, double threshold)
{
    return Hypothesis{std::move(name), ">=", threshold, value, value >= threshold, true};
}

Hypothesis at_most(std::string name, double value, double threshold)
{
    return Hypothesis{std::move(name), "<=", threshold, value, value <= threshold, true};
}

Hypothesis requirement(std::string name, bool holds)
{
    return Hypothesis{std::move(name), "holds", 1.0, holds ? 1.0 : 0.0, holds, true};
}

// Bandwidth rule of each theorem, assuming valid parameters.
RateResult rate_formulas(const RateParams& p)
{
    const double rho = p.rho;
    const double d = p.d;
    RateResult out;
    switch (p.theorem) {
    case Theorem::T1:
        out.exponent = rho / (2.0 * rho + d);
        out.bandwidth = BandwidthRule{1.0, 0.0, d / (2.0 * rho + d)};
        break;
    case Theorem::T2: {
        const double b = std::get<GeometricDecay>(p.decay.decay).b;
        const double log_loss = 2.0 * (b + 1.0) / b;
        out.exponent = rho / (2.0 * rho + d);
        out.log_power = log_loss * rho / (2.0 * rho + d);
        out.bandwidth = BandwidthRule{1.0, log_loss, d / (2.0 * rho + d)};
        break;
    }
    case Theorem::T3Mean: {
        const double q0 = q0_of(p.decay.rate());
        const double denom = d + 2.0 * rho + 2.0 * d / (q0 + d);
        out.exponent = rho / denom;
        out.bandwidth = BandwidthRule{1.0, 0.0, d / denom};
        break;
    }
    case Theorem::T3AlmostSure: {
        const double q0 = q0_of(p.decay.rate());
        const double denom = d * (q0 + 2.0) + rho * (q0 + d);
        out.exponent = (q0 - 2.0) * rho / denom;
        out.log_power = (q0 + d) * rho / denom;
        out.bandwidth = BandwidthRule{q0 - 2.0, q0 + d, d / denom};
        break;
    }
    }
    return out;
}

} // namespace

std::string to_string(Theorem theorem)
{
    switch (theorem) {
    case Theorem::T1:
        return "T1";
    case Theorem::T2:
        return "T2";
    case Theorem::T3Mean:
        return "T3mean";
    case Theorem::T3AlmostSure:
        return "T3as";
    }
    return "unknown";
}

Theorem theorem_from_string(const std::string& name)
{
    for (Theorem t : {Theorem::T1, Theorem::T2, Theorem::T3Mean, Theorem::T3AlmostSure})
        if (to_string(t) == name)
            return t;
    throw DomainError(fmt::format("unknown theorem '{}' (expected T1, T2, T3mean or T3as)", name));
}

double BandwidthRule::raw(std::size_t n) const
{
    if (n < 2)
        throw DomainError("bandwidth rule needs n >= 2");
    const double nn = static_cast<double>(n);
    const double base = std::pow(nn, num_power) / std::pow(std::log(nn), log_power);
    return std::pow(base, exponent);
}

int BandwidthRule::operator()(std::size_t n) const
{
    return std::max(1, static_cast<int>(std::lround(raw(n))));
}

int q0_of(double a)
{
    if (!(a > 1.0))
        throw DomainError(fmt::format("q0 needs a > 1 (got a = {})", a));
    return 2 * static_cast<int>(std::ceil((a - 1.0) / 2.0));
}

AdmissibilityReport check_admissibility(const RateParams& p)
{
    AdmissibilityReport report;
    auto& hs = report.hypotheses;
    hs.push_back(greater("regularity rho", p.rho, 0.0));
    hs.push_back(at_least("dimension d", p.d, 1.0));
    hs.push_back(at_least("moment order q", p.q, 1.0));

    const DependenceBound& bound = p.decay;
    const char* coef = coefficient_name(bound.coefficient);
    const bool geometric = bound.is_geometric();
    const double a = bound.rate();
    const double d = p.d;
    const double rho = p.rho;

    if (geometric) {
        const auto& g = std::get<GeometricDecay>(bound.decay);
        hs.push_back(greater(fmt::format("{} geometric decay rate a", coef), g.a, 0.0));
        hs.push_back(greater(fmt::format("{} geometric decay shape b", coef), g.b, 0.0));
    } else {
        hs.push_back(greater(fmt::format("{} Riemannian decay rate a", coef), a, 1.0));
    }

    const bool basics_ok = std::all_of(hs.begin(), hs.end(), [](const Hypothesis& h) { return h.satisfied; });

    switch (p.theorem) {
    case Theorem::T1:
        if (!geometric) {
            if (bound.coefficient == DependenceCoefficient::Eta)
                hs.push_back(greater("T1 eta: a > max(1 + 2/d + (d+1)/rho, 2 + 1/d)", a,
                                     std::max(1.0 + 2.0 / d + (d + 1.0) / rho, 2.0 + 1.0 / d)));
            else
                hs.push_back(greater("T1 phi~: a > 1 + 2/d + 1/rho", a, 1.0 + 2.0 / d + 1.0 / rho));
            if (a > 1.0)
                hs.push_back(at_most("T1: q <= q0 = 2 ceil((a-1)/2)", p.q, q0_of(a)));
        }
        break;
    case Theorem::T2:
        hs.push_back(requirement("T2: geometric decay", geometric));
        break;
    case Theorem::T3Mean:
    case Theorem::T3AlmostSure:
        hs.push_back(requirement("T3: Riemannian decay", !geometric));
        hs.push_back(at_least("T3: a >= 4", a, 4.0));
        hs.push_back(greater("T3: rho > 2d", rho, 2.0 * d));
        if (a > 1.0)
            hs.push_back(at_most("T3: q <= q0 = 2 ceil((a-1)/2)", p.q, q0_of(a)));
        break;
    }

    // Moment-inequality condition for the bandwidth m_n = n^delta log^gamma n.
    const bool structural_ok = std::all_of(hs.begin(), hs.end(), [](const Hypothesis& h) { return h.satisfied; });
    if (!geometric && basics_ok && structural_ok && p.q >= 2) {
        const double delta = rate_formulas(p).bandwidth.delta();
        const double q = p.q;
        const double lip_factor = bound.coefficient == DependenceCoefficient::Eta ? 4.0 + 2.0 / d : 2.0 + 2.0 / d;
        const double floor_term = bound.coefficient == DependenceCoefficient::Eta ? 2.0 + 1.0 / d : 1.0 + 1.0 / d;
        const double threshold =
            std::max({q - 1.0, (q - 1.0) * delta * lip_factor / (q - 2.0 + delta * (4.0 - q)), floor_term});
        hs.push_back(greater(fmt::format("moment inequality ({}, delta = {:.6g}): a > max(q-1, (q-1) delta "
                                         "{}/(q-2+delta(4-q)), {})",
                                         coef, delta, bound.coefficient == DependenceCoefficient::Eta ? "(4+2/d)" : "(2+2/d)",
                                         bound.coefficient == DependenceCoefficient::Eta ? "2+1/d" : "1+1/d"),
                             a, threshold, false));
        if (p.theorem == Theorem::T3Mean || p.theorem == Theorem::T3AlmostSure) {
            // probability inequality behind the uniform rates
            const double tail = bound.coefficient == DependenceCoefficient::Eta
                                    ? std::max(1.0 + 2.0 * (delta + 1.0 / d) / (1.0 - delta), 2.0 + 1.0 / d)
                                    : std::max(1.0 + 2.0 / (d * (1.0 - delta)), 1.0 + 1.0 / d);
            hs.push_back(greater(fmt::format("probability inequality ({}, delta = {:.6g})", coef, delta), a, tail,
                                 false));
        }
    }

    report.admissible = std::all_of(hs.begin(), hs.end(), [](const Hypothesis& h) { return h.satisfied; });
    return report;
}

std::string AdmissibilityReport::to_text() const
{
    std::string out;
    for (const auto& h : hypotheses) {
        if (h.relation == "holds")
            out += fmt::format("[{}] {}\n", h.satisfied ? "pass" : "FAIL", h.name);
        else
            out += fmt::format("[{}] {}: value {:.6g} {} threshold {:.6g}{}\n", h.satisfied ? "pass" : "FAIL", h.name,
                               h.value, h.relation, h.threshold, h.from_theorem ? "" : " (auxiliary)");
    }
    out += fmt::format("verdict: {}\n", admissible ? "admissible" : "not admissible");
    return out;
}

RateResult rate_exponent(const RateParams& params)
{
    const AdmissibilityReport report = check_admissibility(params);
    for (const auto& h : report.hypotheses)
        if (h.from_theorem && !h.satisfied)
            throw HypothesisError(fmt::format("{} violated: {} (value {}, threshold {})", to_string(params.theorem),
                                              h.name, h.value, h.threshold));
    return rate_formulas(params);
}

int optimal_bandwidth(const RateParams& params, std::size_t n)
{
    if (n < 2)
        throw DomainError("optimal bandwidth needs n >= 2");
    return rate_exponent(params).bandwidth(n);
}

} // namespace wdde
