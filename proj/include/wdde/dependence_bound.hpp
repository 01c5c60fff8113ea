#pragma once

#include <variant>

namespace wdde {

enum class DependenceCoefficient { Eta, PhiTilde };

// C * exp(-a r^b)
struct GeometricDecay
{
    double a = 1.0;
    double b = 1.0;
    bool operator==(const GeometricDecay&) const = default;
};

// C * r^(-a)
struct RiemannianDecay
{
    double a = 2.0;
    bool operator==(const RiemannianDecay&) const = default;
};

using Decay = std::variant<GeometricDecay, RiemannianDecay>;

/// Declared decay profile of eta_r or phi~(r) for a process.
///
/// The constant is an explicit bound choice; the asymptotic statements only
/// fix the shape of the decay.
struct DependenceBound
{
    DependenceCoefficient coefficient = DependenceCoefficient::Eta;
    Decay decay = GeometricDecay{};
    double constant = 1.0;

    bool operator==(const DependenceBound&) const = default;

    bool is_geometric() const noexcept { return std::holds_alternative<GeometricDecay>(decay); }

    /// Decay rate a (both families carry one).
    double rate() const noexcept
    {
        return std::visit([](const auto& d) { return d.a; }, decay);
    }

    /// Throws DomainError unless C > 0, a > 0, b > 0 (geometric) or a > 1 (Riemannian).
    void validate() const;

    /// Bound value at lag r >= 0. Riemannian bounds are capped at C for r < 1.
    double at(double r) const;
};

} // namespace wdde
