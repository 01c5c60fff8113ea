#pragma once

#include "wdde/processes.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wdde {

enum class KernelKind { Compact, FejerProjection, HaarWavelet };

std::string to_string(KernelKind kind);

/// Bandwidth-indexed kernel K_m(x, y) in dimension d = 1.
///
/// Contracts, with m the integer bandwidth index (m ~ h^-d):
///   (a) y -> K_m(x, y) vanishes outside an interval of half-width
///       support_radius / m (compact and Haar kinds; Fejér lives on the circle);
///   (b) x -> K_m(x, y) is Lipschitz with constant lipschitz_scale * m^(1 + 1/d);
///   (c) the integral of K_m(x, .) is 1.
/// The Haar kernel is not Lipschitz and reports an infinite scale.
struct KernelFamily
{
    KernelKind kind = KernelKind::Compact;
    int d = 1;
    int order = 2; // vanishing-moment order; Compact only
    double support_radius = 1.0;
    double lipschitz_scale = 1.5;

    static KernelFamily compact(int order);
    static KernelFamily fejer();
    static KernelFamily haar();

    /// K_m(x, y).
    double operator()(int m, double x, double y) const;

    /// sup_{x,y} |K_m(x, y)|.
    double sup_norm(int m) const;

    /// Lipschitz bound of x -> K_m(x, y): lipschitz_scale * m^(1 + 1/d).
    double lipschitz(int m) const;

    /// Interval of y outside which K_m(x, y) is zero (one period for Fejér).
    std::pair<double, double> support(int m, double x) const;

    std::string name() const;

    bool operator==(const KernelFamily&) const = default;
};

/// Base kernel of order 2 (Epanechnikov) or 4, supported on [-1, 1].
double compact_kernel_eval(int order, double u);

/// Symmetric Dirichlet kernel D_k(u) = sin((2k+1)u/2) / sin(u/2), D_k(0) = 2k + 1.
double dirichlet_eval(int k, double u);

/// Fejér kernel F_m(u) = sin^2(mu/2) / (m sin^2(u/2)), F_m(0) = m.
double fejer_eval(int m, double u);

/// Quadrature of y -> K_m(x, y) over its support (composite Simpson).
double kernel_mass(const KernelFamily& kernel, int m, double x, std::size_t panels = 10000);

struct EstimateResult
{
    double x = 0.0;
    double value = 0.0;
    std::size_t n = 0;
    int m = 1;
    KernelKind kind = KernelKind::Compact;
    std::optional<double> bias_bound; // C * m^(-rho/d), when a model is supplied
};

/// Attaches the deterministic bias bound C * m^(-rho/d), d = 1.
EstimateResult with_bias_bound(EstimateResult result, double constant, double rho);

/// Linear estimator f_n(x) = (1/n) sum_i K_m(x, X_i).
EstimateResult estimate_at(std::span<const double> data, const KernelFamily& kernel, int m, double x);
EstimateResult estimate_at(const Path& path, const KernelFamily& kernel, int m, double x);

/// Fejér projection estimate (1/(2 pi n)) sum_i F_m(x - X_i) for 2pi-periodic data.
EstimateResult fejer_estimate(const Path& path, int m, double x);

/// Haar scaling-function estimate at resolution j: a histogram on dyadic bins
/// of width 2^-j, with m = 2^j.
EstimateResult haar_wavelet_estimate(const Path& path, int j, double x);

/// Pointwise estimate_at over `grid`, in grid order.
std::vector<EstimateResult> estimate_grid(const Path& path, const KernelFamily& kernel, int m,
                                          std::span<const double> grid);

/// Fejér estimate held as a truncated Fourier series,
///   1/(2 pi) + (1/pi) sum_{k=1}^{m-1} (1 - k/m) (c_k cos kx + s_k sin kx),
/// with empirical coefficients c_k, s_k. Equal to fejer_estimate but O(m)
/// per evaluation once built.
class FejerSeries
{
public:
    FejerSeries(std::span<const double> data, int m);
    FejerSeries(int m, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

    double operator()(double x) const;

    int m() const noexcept { return m_; }
    const std::vector<double>& cos_coeffs() const noexcept { return cos_; }
    const std::vector<double>& sin_coeffs() const noexcept { return sin_; }

private:
    int m_;
    std::vector<double> cos_; // c_1 .. c_{m-1}
    std::vector<double> sin_; // s_1 .. s_{m-1}
};

} // namespace wdde
