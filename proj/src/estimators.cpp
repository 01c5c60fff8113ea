#include "wdde/estimators.hpp"

#include "wdde/errors.hpp"
#include "wdde/quadrature.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numbers>

namespace wdde {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void check_bandwidth(int m)
{
    if (m < 1)
        throw DomainError(fmt::format("bandwidth index m = {} must be at least 1", m));
}

// sum_{|k|<m} (1 - |k|/m) cos(ku); the removable-singularity fallback of F_m.
double fejer_cosine_sum(int m, double u)
{
    double s = 1.0;
    for (int k = 1; k < m; ++k)
        s += 2.0 * (1.0 - static_cast<double>(k) / m) * std::cos(k * u);
    return s;
}

} // namespace

std::string to_string(KernelKind kind)
{
    switch (kind) {
    case KernelKind::Compact:
        return "compact";
    case KernelKind::FejerProjection:
        return "fejer";
    case KernelKind::HaarWavelet:
        return "haar";
    }
    return "unknown";
}

double compact_kernel_eval(int order, double u)
{
    if (order != 2 && order != 4)
        throw DomainError(fmt::format("unsupported compact kernel order {}", order));
    if (std::abs(u) > 1.0)
        return 0.0;
    const double u2 = u * u;
    if (order == 2)
        return 0.75 * (1.0 - u2);
    return 15.0 / 32.0 * (1.0 - u2) * (3.0 - 7.0 * u2);
}

double dirichlet_eval(int k, double u)
{
    if (k < 0)
        throw DomainError("Dirichlet kernel index must be nonnegative");
    const double s = std::sin(0.5 * u);
    if (std::abs(s) > 1e-8)
        return std::sin((2.0 * k + 1.0) * 0.5 * u) / s;
    double sum = 1.0;
    for (int j = 1; j <= k; ++j)
        sum += 2.0 * std::cos(j * u);
    return sum;
}

double fejer_eval(int m, double u)
{
    check_bandwidth(m);
    const double s = std::sin(0.5 * u);
    if (std::abs(s) > 1e-8) {
        const double t = std::sin(0.5 * m * u);
        return t * t / (m * s * s);
    }
    return fejer_cosine_sum(m, u);
}

// ---------------------------------------------------------------------------

KernelFamily KernelFamily::compact(int order)
{
    // max |K'| on [-1, 1]: 3/2 for Epanechnikov, (15/32) * 8 at u = +-1 for order 4
    switch (order) {
    case 2:
        return KernelFamily{KernelKind::Compact, 1, 2, 1.0, 1.5};
    case 4:
        return KernelFamily{KernelKind::Compact, 1, 4, 1.0, 3.75};
    default:
        throw DomainError(fmt::format("unsupported compact kernel order {}", order));
    }
}

KernelFamily KernelFamily::fejer()
{
    // |F_m'| <= sum_{|k|<m} |k| (1 - |k|/m) = (m^2 - 1) / 3, then divide by 2 pi
    return KernelFamily{KernelKind::FejerProjection, 1, 2, std::numbers::pi, 1.0 / (6.0 * std::numbers::pi)};
}

KernelFamily KernelFamily::haar()
{
    return KernelFamily{KernelKind::HaarWavelet, 1, 1, 0.5, std::numeric_limits<double>::infinity()};
}

double KernelFamily::operator()(int m, double x, double y) const
{
    switch (kind) {
    case KernelKind::Compact:
        return m * compact_kernel_eval(order, m * (x - y));
    case KernelKind::FejerProjection:
        return fejer_eval(m, x - y) / two_pi;
    case KernelKind::HaarWavelet:
        return std::floor(m * x) == std::floor(m * y) ? static_cast<double>(m) : 0.0;
    }
    return 0.0;
}

std::pair<double, double> KernelFamily::support(int m, double x) const
{
    check_bandwidth(m);
    switch (kind) {
    case KernelKind::Compact:
        return {x - support_radius / m, x + support_radius / m};
    case KernelKind::FejerProjection:
        return {x - std::numbers::pi, x + std::numbers::pi};
    case KernelKind::HaarWavelet: {
        const double bin = std::floor(m * x);
        return {bin / m, (bin + 1.0) / m};
    }
    }
    return {x, x};
}

double KernelFamily::sup_norm(int m) const
{
    check_bandwidth(m);
    switch (kind) {
    case KernelKind::Compact:
        return m * compact_kernel_eval(order, 0.0);
    case KernelKind::FejerProjection:
        return m / two_pi;
    case KernelKind::HaarWavelet:
        return m;
    }
    return 0.0;
}

double KernelFamily::lipschitz(int m) const
{
    check_bandwidth(m);
    return lipschitz_scale * std::pow(static_cast<double>(m), 1.0 + 1.0 / d);
}

std::string KernelFamily::name() const
{
    switch (kind) {
    case KernelKind::Compact:
        return order == 2 ? "epanechnikov" : fmt::format("compact{}", order);
    case KernelKind::FejerProjection:
        return "fejer";
    case KernelKind::HaarWavelet:
        return "haar";
    }
    return "unknown";
}

double kernel_mass(const KernelFamily& kernel, int m, double x, std::size_t panels)
{
    auto [lo, hi] = kernel.support(m, x);
    // Stay strictly inside the support so that the half-open Haar bin is not
    // sampled at its excluded end.
    const double inset = 1e-12 * (hi - lo);
    return simpson([&](double y) { return kernel(m, x, y); }, lo + inset, hi - inset, panels);
}

// ---------------------------------------------------------------------------

EstimateResult with_bias_bound(EstimateResult result, double constant, double rho)
{
    result.bias_bound = constant * std::pow(static_cast<double>(result.m), -rho);
    return result;
}

EstimateResult estimate_at(std::span<const double> data, const KernelFamily& kernel, int m, double x)
{
    check_bandwidth(m);
    if (data.empty())
        throw DomainError("estimate_at: empty sample");
    double sum = 0.0;
    for (double y : data)
        sum += kernel(m, x, y);
    return EstimateResult{x, sum / static_cast<double>(data.size()), data.size(), m, kernel.kind, std::nullopt};
}

EstimateResult estimate_at(const Path& path, const KernelFamily& kernel, int m, double x)
{
    return estimate_at(path.values(), kernel, m, x);
}

EstimateResult fejer_estimate(const Path& path, int m, double x)
{
    return estimate_at(path, KernelFamily::fejer(), m, x);
}

EstimateResult haar_wavelet_estimate(const Path& path, int j, double x)
{
    if (j < 0 || j > 30)
        throw DomainError(fmt::format("Haar resolution level j = {} must lie in [0, 30]", j));
    return estimate_at(path, KernelFamily::haar(), 1 << j, x);
}

std::vector<EstimateResult> estimate_grid(const Path& path, const KernelFamily& kernel, int m,
                                          std::span<const double> grid)
{
    std::vector<EstimateResult> out;
    out.reserve(grid.size());
    for (double x : grid)
        out.push_back(estimate_at(path, kernel, m, x));
    return out;
}

// ---------------------------------------------------------------------------

FejerSeries::FejerSeries(std::span<const double> data, int m)
    : m_(m)
    , cos_(static_cast<std::size_t>(std::max(m - 1, 0)), 0.0)
    , sin_(cos_.size(), 0.0)
{
    check_bandwidth(m);
    if (data.empty())
        throw DomainError("FejerSeries: empty sample");
    const std::size_t terms = cos_.size();
    for (double t : data) {
        // cos(kt), sin(kt) by the angle-addition recurrence
        const double c1 = std::cos(t);
        const double s1 = std::sin(t);
        double c = 1.0;
        double s = 0.0;
        for (std::size_t k = 0; k < terms; ++k) {
            const double cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            cos_[k] += c;
            sin_[k] += s;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (std::size_t k = 0; k < terms; ++k) {
        cos_[k] *= inv_n;
        sin_[k] *= inv_n;
    }
}

FejerSeries::FejerSeries(int m, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : m_(m)
    , cos_(std::move(cos_coeffs))
    , sin_(std::move(sin_coeffs))
{
    check_bandwidth(m);
    if (cos_.size() != static_cast<std::size_t>(m - 1) || sin_.size() != cos_.size())
        throw DomainError("FejerSeries: coefficient count must be m - 1");
}

double FejerSeries::operator()(double x) const
{
    double s = 0.0;
    for (std::size_t i = 0; i < cos_.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        s += (1.0 - k / m_) * (cos_[i] * std::cos(k * x) + sin_[i] * std::sin(k * x));
    }
    return 1.0 / two_pi + s / std::numbers::pi;
}

} // namespace wdde
