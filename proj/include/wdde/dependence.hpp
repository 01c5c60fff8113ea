#pragma once

#include "wdde/dependence_bound.hpp"
#include "wdde/estimators.hpp"
#include "wdde/processes.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wdde {

// ---------------------------------------------------------------------------
// Analytic bounds
// ---------------------------------------------------------------------------

/// eta_r <= 2 delta_{ceil(r/2)} for the linear Bernoulli shift, with
/// delta_s = E|xi| * sum_{|j| >= s} |a_j| summed exactly over the stored map.
double eta_bound_linear(const CoefficientMap& coeffs, double innovation_abs_moment, int r);

/// phi~(r) <= 2^-r for the doubling chain: each step x -> (x + eps)/2
/// halves the Lipschitz diameter of the conditional law.
double phi_bound_doubling(int r);

/// Upper bound on C_k(r) from the weak-dependence covariance inequalities,
/// for u = K_m(., x) / sqrt(m):
///   eta:  k 2^k ||u||^(k-1) Lip(u) eta_r
///   phi~: k 2^k ||u||^(k-2) E|u(X_0)| Lip(u) phi~(r)
double covariance_envelope(const DependenceBound& bound, int k, double sup_u, double mean_abs_u, double lip_u,
                           double r);

// ---------------------------------------------------------------------------
// Empirical covariance terms and the moment inequality
// ---------------------------------------------------------------------------

/// Largest window of indices enumerated for the covariance supremum.
inline constexpr std::size_t covariance_window = 64;

/// Enumeration budget for the restricted tuple set.
inline constexpr std::size_t max_covariance_tuples = 1'000'000;

/// Number of ordered k-tuples t_1 <= ... <= t_k in [0, window) whose largest
/// consecutive gap equals r.
std::size_t count_tuples(int k, int r, std::size_t window);

/// Monte Carlo replicates of Z_i = u(X_i) - E u(X_i), u = K_m(., x) / sqrt(m),
/// with E u(X_i) estimated per index from the same replicates.
class CenteredSample
{
public:
    CenteredSample(const ProcessSpec& spec, double x, const KernelFamily& kernel, int m, std::size_t n,
                   std::size_t replicates, std::uint64_t seed, unsigned workers = 1);

    /// Builds from raw u-values laid out index-major: u[t * replicates + rep].
    CenteredSample(std::vector<double> u_values, std::size_t n, std::size_t replicates);

    std::size_t n() const noexcept { return n_; }
    std::size_t replicates() const noexcept { return replicates_; }

    /// Z_t over replicates (contiguous).
    std::span<const double> row(std::size_t t) const
    {
        return {z_.data() + t * replicates_, replicates_};
    }

    /// Replicate means of u(X_t) before centering.
    const std::vector<double>& means() const noexcept { return means_; }

    /// sum_t Z_t for replicate `rep`.
    double partial_sum(std::size_t rep) const;

private:
    void center();

    std::size_t n_;
    std::size_t replicates_;
    std::vector<double> z_;
    std::vector<double> means_;
};

struct CovarianceEstimate
{
    double value = 0.0;  // max |cov| over tuples and splits
    double std_error = 0.0; // Monte Carlo standard error of the maximising term
    std::size_t tuples = 0;
};

/// C_k(r) for every r in [0, window) from one pass over all tuples in the
/// window. Index r of the result holds C_k(r).
std::vector<CovarianceEstimate> covariance_table(const CenteredSample& sample, int k);

/// C_k(r) from the tuples with largest gap exactly r only.
CovarianceEstimate covariance_at(const CenteredSample& sample, int k, int r);

/// Monte Carlo estimate of C_k(r) for k in {2, 4}, indices restricted to the
/// first min(n, 64). Throws EnumerationError beyond the tuple budget.
CovarianceEstimate estimate_ck(const ProcessSpec& spec, double x, const KernelFamily& kernel, int m, int k, int r,
                               std::size_t n, std::size_t replicates, std::uint64_t seed, unsigned workers = 1);

/// V_{k,n} = n sum_{r=0}^{n-1} (r+1)^(k-2) C_k(r); missing lags count as zero.
double v_statistic(std::size_t n, int k, std::span<const double> c_k);

/// ((2q-2)! / (q-1)!) * max(V_{2,n}^(q/2), V_{q,n}).
double moment_bound_rhs(int q, double v2, double vq);

struct MomentCheckReport
{
    int q = 2;
    std::size_t n = 0;
    std::size_t replicates = 0;
    std::map<std::pair<int, int>, double> c_hat; // (k, r) -> C_k(r)
    std::map<int, double> v_hat;                 // k -> V_{k,n}
    double lhs = 0.0;                            // E|sum Z_i|^q
    double lhs_stderr = 0.0;
    double rhs = 0.0;
    double slack = 0.25;
    bool holds = false;
    std::string note;
};

/// Assembles V_{k,n}, the right-hand side and the verdict from covariance
/// terms and a left-hand side (estimated or exact).
MomentCheckReport assemble_moment_report(int q, std::size_t n, std::size_t replicates,
                                         std::map<std::pair<int, int>, double> c_hat, double lhs, double slack);

/// Checks ||sum Z_i||_q^q <= ((2q-2)!/(q-1)!) max(V_2^(q/2), V_q) with
/// estimated covariances, holding when lhs <= rhs * (1 + slack).
/// Requires q in {2, 4} and 2 <= n <= 64.
MomentCheckReport verify_moment_inequality(const ProcessSpec& spec, double x, const KernelFamily& kernel, int m,
                                           int q, std::size_t n, std::size_t replicates, std::uint64_t seed,
                                           double slack = 0.25, unsigned workers = 1);

} // namespace wdde
