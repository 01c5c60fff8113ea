#pragma once

#include "wdde/dependence_bound.hpp"
#include "wdde/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wdde {

// ---------------------------------------------------------------------------
// Innovations
// ---------------------------------------------------------------------------

struct Bernoulli
{
    double p = 0.5;
    bool operator==(const Bernoulli&) const = default;
};

struct Gaussian
{
    double mean = 0.0;
    double sd = 1.0;
    bool operator==(const Gaussian&) const = default;
};

struct Uniform
{
    double lo = 0.0;
    double hi = 1.0;
    bool operator==(const Uniform&) const = default;
};

// Deterministic innovation sequence, consumed in order.
struct Fixed
{
    std::vector<double> values;
    bool operator==(const Fixed&) const = default;
};

using InnovationSpec = std::variant<Bernoulli, Gaussian, Uniform, Fixed>;

/// Draws innovations from an InnovationSpec. Fixed sequences throw
/// DomainError once exhausted.
class InnovationSource
{
public:
    InnovationSource(const InnovationSpec& spec, Rng& rng);

    double next();

private:
    const InnovationSpec& spec_;
    Rng& rng_;
    std::size_t cursor_ = 0;
};

/// E|xi|^p for the innovation law (empirical mean for Fixed).
double innovation_abs_moment(const InnovationSpec& spec, double p = 1.0);

/// ||xi||_p = (E|xi|^p)^(1/p).
double innovation_norm(const InnovationSpec& spec, double p);

std::string describe(const InnovationSpec& spec);

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

/// An observed sequence X_1..X_n together with what generated it.
class Path
{
public:
    Path(std::vector<double> values, std::uint64_t seed, std::string spec_id);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::string& spec_id() const noexcept { return spec_id_; }

    bool operator==(const Path&) const = default;

    /// Same values and seed under another generator id.
    Path with_id(std::string spec_id) &&
    {
        spec_id_ = std::move(spec_id);
        return std::move(*this);
    }

private:
    std::vector<double> values_;
    std::uint64_t seed_;
    std::string spec_id_;
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Offset -> coefficient for a two-sided linear filter.
using CoefficientMap = std::map<int, double>;

/// a_0 = 1, a_i = |i|^-decay for 1 <= |i| <= radius.
CoefficientMap power_law_coefficients(double decay, int radius);

/// Doubling Markov chain X_k = (X_{k-1} + eps_k) / 2.
///
/// Time reversal of the expanding map x -> 2x mod 1, which is not iterated
/// directly: doubling in binary floating point loses one mantissa bit per step
/// and collapses to 0 after ~53 iterations. When `x0` is empty it is drawn
/// from U[0,1], the invariant law.
Path simulate_doubling(std::size_t n, std::optional<double> x0, const InnovationSpec& innovations,
                       std::uint64_t seed);

/// Two-sided linear process X_t = sum_i a_i xi_{t-i} over a finite window.
/// Innovations are drawn for t-i in [1 - max_offset, n - min_offset], oldest first.
Path simulate_linear(std::size_t n, const CoefficientMap& coeffs, const InnovationSpec& innovations,
                     std::uint64_t seed);

/// Bilinear recursion X_t = xi_t (a + sum_j a_j X_{t-j}) + b + sum_j b_j X_{t-j},
/// started from zero history; the first `burn_in` values are discarded.
struct BilinearParams
{
    double a = 1.0;
    double b = 0.0;
    std::vector<double> ar; // a_1, a_2, ...
    std::vector<double> ma; // b_1, b_2, ...
    InnovationSpec innovations = Gaussian{};
    std::size_t burn_in = 1000;
    double p = 2.0; // moment order used in the stationarity condition

    bool operator==(const BilinearParams&) const = default;
};

/// lambda = ||xi_0||_p sum|a_j| + sum|b_j|.
double bilinear_lambda(const BilinearParams& params);

/// Throws StationarityError when bilinear_lambda(params) >= 1.
Path simulate_bilinear(std::size_t n, const BilinearParams& params, std::uint64_t seed);

struct Arithmetic
{
    std::size_t step = 1; // h(i) = step * i
    bool operator==(const Arithmetic&) const = default;
};

struct Geometric
{
    std::size_t base = 2; // h(i) = base^i
    bool operator==(const Geometric&) const = default;
};

using Stride = std::variant<Arithmetic, Geometric>;

std::string describe(const Stride& stride);

/// 1-based sampling index h(i).
std::size_t stride_index(const Stride& stride, std::size_t i);

/// Returns (x_{h(1)}, ..., x_{h(k)}) with 1-based indices into `path`.
///
/// With no `count`, k is the largest value whose indices stay in range.
/// Geometric sampling thins a series so that its dependence coefficients
/// decay faster than those of the underlying process. Throws DomainError when
/// an index falls outside the path or no index fits.
Path sample_process(const Path& path, const Stride& stride, std::optional<std::size_t> count = {});

// ---------------------------------------------------------------------------
// Process specifications
// ---------------------------------------------------------------------------

enum class ProcessKind { Doubling, Linear, Bilinear, Sampled, IidBaseline };

std::string to_string(ProcessKind kind);

struct ProcessSpec;

struct DoublingParams
{
    std::optional<double> x0; // empty: stationary start
    InnovationSpec innovations = Bernoulli{0.5};
    bool operator==(const DoublingParams&) const = default;
};

struct LinearParams
{
    CoefficientMap coeffs;
    InnovationSpec innovations = Gaussian{};
    bool operator==(const LinearParams&) const = default;
};

struct IidParams
{
    InnovationSpec innovations = Gaussian{};
    bool operator==(const IidParams&) const = default;
};

struct SampledParams
{
    std::shared_ptr<const ProcessSpec> base;
    Stride stride = Arithmetic{1};
    bool operator==(const SampledParams& other) const;
};

using ProcessParams = std::variant<DoublingParams, LinearParams, BilinearParams, SampledParams, IidParams>;

/// Known marginal density on [lo, hi] (the support, or a range carrying all
/// but a negligible fraction of the mass).
struct MarginalDensity
{
    std::function<double(double)> pdf;
    double lo = 0.0;
    double hi = 1.0;
    std::optional<double> rho; // regularity, when known; +inf for analytic densities
};

/// A generative model for a weakly dependent series plus what is known about
/// it analytically. Equality compares the generating parameters only.
struct ProcessSpec
{
    ProcessKind kind = ProcessKind::IidBaseline;
    ProcessParams params = IidParams{};
    std::optional<MarginalDensity> true_density;
    std::optional<DependenceBound> dependence;
    // Declared, not verified numerically.
    bool joint_densities_bounded = false; // [H4]
    bool dynamical_system = false;        // [H5]

    std::string id() const;

    bool operator==(const ProcessSpec& other) const
    {
        return kind == other.kind && params == other.params && dependence == other.dependence;
    }
};

ProcessSpec doubling_process(std::optional<double> x0 = {});
ProcessSpec linear_process(CoefficientMap coeffs, InnovationSpec innovations = Gaussian{},
                           std::optional<DependenceBound> dependence = {});
/// Linear process with power_law_coefficients(decay, radius); declares
/// Riemannian eta decay of order decay - 1 with an explicit constant.
ProcessSpec power_law_linear_process(double decay, int radius, InnovationSpec innovations = Gaussian{});
ProcessSpec bilinear_process(BilinearParams params, std::optional<DependenceBound> dependence = {});
ProcessSpec iid_process(InnovationSpec innovations);
ProcessSpec sampled_process(ProcessSpec base, Stride stride);

/// Builds the spec (density, declared bounds) from generating parameters.
ProcessSpec make_process(const ProcessParams& params, std::optional<DependenceBound> dependence = {});

/// Checks the ProcessSpec invariants: unit mass of the declared density and a
/// dependence bound consistent with the kind. Throws DomainError.
void validate(const ProcessSpec& spec);

/// Quadrature mass of the declared density over its range.
double density_mass(const MarginalDensity& density);

/// Simulates X_1..X_n. Pure in (spec, n, seed).
Path simulate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed);

} // namespace wdde
