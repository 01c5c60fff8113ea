#include "wdde/dependence.hpp"

#include "wdde/errors.hpp"
#include "wdde/parallel.hpp"
#include "wdde/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace wdde {

// ---------------------------------------------------------------------------
// DependenceBound
// ---------------------------------------------------------------------------

void DependenceBound::validate() const
{
    if (!(constant > 0.0))
        throw DomainError("dependence bound constant must be positive");
    if (const auto* g = std::get_if<GeometricDecay>(&decay)) {
        if (!(g->a > 0.0) || !(g->b > 0.0))
            throw DomainError(fmt::format("geometric decay needs a > 0 and b > 0 (got a = {}, b = {})", g->a, g->b));
    } else if (const auto* rd = std::get_if<RiemannianDecay>(&decay); !(rd->a > 1.0)) {
        throw DomainError(fmt::format("Riemannian decay needs a > 1 (got a = {})", rd->a));
    }
}

double DependenceBound::at(double r) const
{
    if (r < 0.0)
        throw DomainError("dependence bound evaluated at a negative lag");
    if (const auto* g = std::get_if<GeometricDecay>(&decay))
        return constant * std::exp(-g->a * std::pow(r, g->b));
    const double a = std::get<RiemannianDecay>(decay).a;
    return r < 1.0 ? constant : constant * std::pow(r, -a);
}

// ---------------------------------------------------------------------------
// Analytic bounds
// ---------------------------------------------------------------------------

double eta_bound_linear(const CoefficientMap& coeffs, double innovation_abs_moment, int r)
{
    if (r < 1)
        throw DomainError("eta bound needs a lag r >= 1");
    const int s = (r + 1) / 2;
    double tail = 0.0;
    for (const auto& [offset, a] : coeffs)
        if (std::abs(offset) >= s)
            tail += std::abs(a);
    return 2.0 * innovation_abs_moment * tail;
}

double phi_bound_doubling(int r)
{
    if (r < 0)
        throw DomainError("phi bound needs a lag r >= 0");
    return std::ldexp(1.0, -r);
}

double covariance_envelope(const DependenceBound& bound, int k, double sup_u, double mean_abs_u, double lip_u,
                           double r)
{
    if (k < 2)
        throw DomainError("covariance envelope needs k >= 2");
    const double lead = k * std::ldexp(1.0, k) * lip_u * bound.at(r);
    if (bound.coefficient == DependenceCoefficient::Eta)
        return lead * std::pow(sup_u, k - 1);
    return lead * std::pow(sup_u, k - 2) * mean_abs_u;
}

// ---------------------------------------------------------------------------
// Tuple enumeration
// ---------------------------------------------------------------------------

namespace {

// Gap vectors (g_1..g_{k-1}) with every g_i <= r, counted by their sum.
std::vector<std::size_t> gap_sum_counts(int k, int r, std::size_t max_sum)
{
    std::vector<std::size_t> counts(max_sum + 1, 0);
    counts[0] = 1;
    for (int i = 0; i < k - 1; ++i) {
        std::vector<std::size_t> next(max_sum + 1, 0);
        for (std::size_t s = 0; s <= max_sum; ++s) {
            if (counts[s] == 0)
                continue;
            for (int g = 0; g <= r && s + static_cast<std::size_t>(g) <= max_sum; ++g)
                next[s + static_cast<std::size_t>(g)] += counts[s];
        }
        counts = std::move(next);
    }
    return counts;
}

double dot(const double* a, const double* b, std::size_t n)
{
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i)
        s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

double mean_of(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

// Which tuple and split attained the supremum for one lag.
struct Argmax
{
    double value = -1.0;
    std::array<std::size_t, 4> tuple{};
    int split = 1;
};

// Standard error of the sample covariance of A = prod_{i<=p} Z_{t_i} and
// B = prod_{i>p} Z_{t_i}.
double covariance_stderr(const CenteredSample& sample, int k, const Argmax& best)
{
    const std::size_t reps = sample.replicates();
    if (reps < 2)
        return std::numeric_limits<double>::infinity();
    std::vector<double> a(reps, 1.0);
    std::vector<double> b(reps, 1.0);
    for (int i = 0; i < k; ++i) {
        const auto row = sample.row(best.tuple[static_cast<std::size_t>(i)]);
        auto& target = i < best.split ? a : b;
        for (std::size_t rep = 0; rep < reps; ++rep)
            target[rep] *= row[rep];
    }
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    std::vector<double> w(reps);
    for (std::size_t rep = 0; rep < reps; ++rep)
        w[rep] = (a[rep] - ma) * (b[rep] - mb);
    const double mw = mean_of(w);
    double ss = 0.0;
    for (double v : w)
        ss += (v - mw) * (v - mw);
    return std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
}

void check_order(int k)
{
    if (k != 2 && k != 4)
        throw DomainError(fmt::format("covariance order k = {} must be 2 or 4", k));
}

// One pass over the tuples of the window, restricted to largest gap `only_r`
// when it is nonnegative.
std::vector<CovarianceEstimate> scan_tuples(const CenteredSample& sample, int k, int only_r)
{
    check_order(k);
    const std::size_t w = sample.n();
    const std::size_t reps = sample.replicates();
    const double inv_reps = 1.0 / static_cast<double>(reps);

    std::size_t budget = 0;
    if (only_r >= 0) {
        budget = count_tuples(k, only_r, w);
    } else {
        for (std::size_t r = 0; r < w; ++r)
            budget += count_tuples(k, static_cast<int>(r), w);
    }
    if (budget > max_covariance_tuples)
        throw EnumerationError(
            fmt::format("{} tuples of order {} exceed the enumeration budget of {}", budget, k, max_covariance_tuples));

    std::vector<double> m1(w);
    for (std::size_t t = 0; t < w; ++t)
        m1[t] = mean_of(sample.row(t));

    std::vector<Argmax> best(w);
    std::vector<std::size_t> seen(w, 0);
    const auto consider = [&](std::size_t r, double cov, std::array<std::size_t, 4> tuple, int split) {
        ++seen[r];
        const double v = std::abs(cov);
        if (v > best[r].value)
            best[r] = Argmax{v, tuple, split};
    };
    const auto wanted = [&](std::size_t r) { return only_r < 0 || r == static_cast<std::size_t>(only_r); };
    const std::size_t max_gap = only_r < 0 ? w : static_cast<std::size_t>(only_r);

    if (k == 2) {
        for (std::size_t a = 0; a < w; ++a)
            for (std::size_t b = a; b < w && b - a <= max_gap; ++b) {
                if (!wanted(b - a))
                    continue;
                const double m2 = dot(sample.row(a).data(), sample.row(b).data(), reps) * inv_reps;
                consider(b - a, m2 - m1[a] * m1[b], {a, b, 0, 0}, 1);
            }
    } else {
        // Pair and triple moments for the split products.
        std::vector<double> m2(w * w, 0.0);
        for (std::size_t a = 0; a < w; ++a)
            for (std::size_t b = a; b < w; ++b)
                m2[a * w + b] = dot(sample.row(a).data(), sample.row(b).data(), reps) * inv_reps;

        std::vector<double> m3(w * w * w, 0.0);
        std::vector<double> pair(reps);
        for (std::size_t a = 0; a < w; ++a)
            for (std::size_t b = a; b < w; ++b) {
                const auto za = sample.row(a);
                const auto zb = sample.row(b);
                for (std::size_t rep = 0; rep < reps; ++rep)
                    pair[rep] = za[rep] * zb[rep];
                for (std::size_t c = b; c < w; ++c)
                    m3[(a * w + b) * w + c] = dot(pair.data(), sample.row(c).data(), reps) * inv_reps;
            }

        std::vector<double> triple(reps);
        for (std::size_t a = 0; a < w; ++a)
            for (std::size_t b = a; b < w && b - a <= max_gap; ++b) {
                const auto za = sample.row(a);
                const auto zb = sample.row(b);
                for (std::size_t rep = 0; rep < reps; ++rep)
                    pair[rep] = za[rep] * zb[rep];
                for (std::size_t c = b; c < w && c - b <= max_gap; ++c) {
                    const auto zc = sample.row(c);
                    for (std::size_t rep = 0; rep < reps; ++rep)
                        triple[rep] = pair[rep] * zc[rep];
                    const std::size_t partial = std::max(b - a, c - b);
                    for (std::size_t d = c; d < w && d - c <= max_gap; ++d) {
                        const std::size_t r = std::max(partial, d - c);
                        if (!wanted(r))
                            continue;
                        const double m4 = dot(triple.data(), sample.row(d).data(), reps) * inv_reps;
                        const std::array<std::size_t, 4> tuple{a, b, c, d};
                        consider(r, m4 - m1[a] * m3[(b * w + c) * w + d], tuple, 1);
                        consider(r, m4 - m2[a * w + b] * m2[c * w + d], tuple, 2);
                        consider(r, m4 - m3[(a * w + b) * w + c] * m1[d], tuple, 3);
                    }
                }
            }
    }

    std::vector<CovarianceEstimate> out(w);
    for (std::size_t r = 0; r < w; ++r) {
        if (seen[r] == 0)
            continue;
        out[r].value = best[r].value;
        out[r].std_error = covariance_stderr(sample, k, best[r]);
        out[r].tuples = seen[r] / static_cast<std::size_t>(k - 1);
    }
    return out;
}

} // namespace

std::size_t count_tuples(int k, int r, std::size_t window)
{
    if (k < 1 || r < 0 || window == 0)
        return 0;
    if (k == 1)
        return r == 0 ? window : 0;
    const std::size_t max_sum = window - 1;
    const auto upto_r = gap_sum_counts(k, r, max_sum);
    const auto below_r = r > 0 ? gap_sum_counts(k, r - 1, max_sum) : std::vector<std::size_t>(max_sum + 1, 0);
    std::size_t total = 0;
    for (std::size_t s = 0; s <= max_sum; ++s)
        total += (upto_r[s] - below_r[s]) * (window - s);
    return total;
}

// ---------------------------------------------------------------------------
// CenteredSample
// ---------------------------------------------------------------------------

CenteredSample::CenteredSample(const ProcessSpec& spec, double x, const KernelFamily& kernel, int m, std::size_t n,
                               std::size_t replicates, std::uint64_t seed, unsigned workers)
    : n_(std::min(n, covariance_window))
    , replicates_(replicates)
    , z_(n_ * replicates)
{
    if (n == 0 || replicates == 0)
        throw DomainError("centered sample needs n >= 1 and at least one replicate");
    if (m < 1)
        throw DomainError("bandwidth index m must be at least 1");
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    parallel_for(replicates, workers, [&](std::size_t rep) {
        const Path path = simulate(spec, n, derive_seed(seed, rep));
        for (std::size_t t = 0; t < n_; ++t)
            z_[t * replicates_ + rep] = kernel(m, x, path[t]) * scale;
    });
    center();
}

CenteredSample::CenteredSample(std::vector<double> u_values, std::size_t n, std::size_t replicates)
    : n_(n)
    , replicates_(replicates)
    , z_(std::move(u_values))
{
    if (n == 0 || replicates == 0 || z_.size() != n * replicates)
        throw DomainError("centered sample: value count must equal n * replicates");
    center();
}

void CenteredSample::center()
{
    means_.assign(n_, 0.0);
    for (std::size_t t = 0; t < n_; ++t) {
        double* row = z_.data() + t * replicates_;
        double s = 0.0;
        for (std::size_t rep = 0; rep < replicates_; ++rep)
            s += row[rep];
        const double mean = s / static_cast<double>(replicates_);
        means_[t] = mean;
        for (std::size_t rep = 0; rep < replicates_; ++rep)
            row[rep] -= mean;
    }
}

double CenteredSample::partial_sum(std::size_t rep) const
{
    double s = 0.0;
    for (std::size_t t = 0; t < n_; ++t)
        s += z_[t * replicates_ + rep];
    return s;
}

// ---------------------------------------------------------------------------
// Covariance terms
// ---------------------------------------------------------------------------

std::vector<CovarianceEstimate> covariance_table(const CenteredSample& sample, int k)
{
    return scan_tuples(sample, k, -1);
}

CovarianceEstimate covariance_at(const CenteredSample& sample, int k, int r)
{
    if (r < 0 || static_cast<std::size_t>(r) >= sample.n())
        throw DomainError(fmt::format("gap r = {} outside the enumeration window of {} indices", r, sample.n()));
    return scan_tuples(sample, k, r)[static_cast<std::size_t>(r)];
}

CovarianceEstimate estimate_ck(const ProcessSpec& spec, double x, const KernelFamily& kernel, int m, int k, int r,
                               std::size_t n, std::size_t replicates, std::uint64_t seed, unsigned workers)
{
    check_order(k);
    if (r < 0 || static_cast<std::size_t>(r) >= n)
        throw DomainError(fmt::format("gap r = {} must satisfy 0 <= r < n = {}", r, n));
    const std::size_t window = std::min(n, covariance_window);
    if (count_tuples(k, r, window) > max_covariance_tuples)
        throw EnumerationError("restricted tuple count exceeds the enumeration budget");
    const CenteredSample sample(spec, x, kernel, m, n, replicates, seed, workers);
    return covariance_at(sample, k, r);
}

double v_statistic(std::size_t n, int k, std::span<const double> c_k)
{
    double s = 0.0;
    const std::size_t lags = std::min(n, c_k.size());
    for (std::size_t r = 0; r < lags; ++r)
        s += std::pow(static_cast<double>(r + 1), k - 2) * c_k[r];
    return static_cast<double>(n) * s;
}

double moment_bound_rhs(int q, double v2, double vq)
{
    if (q < 2 || q % 2 != 0)
        throw DomainError(fmt::format("moment order q = {} must be an even integer >= 2", q));
    // (2q-2)! / (q-1)! = q (q+1) ... (2q-2)
    double factor = 1.0;
    for (int i = q; i <= 2 * q - 2; ++i)
        factor *= i;
    return factor * std::max(std::pow(v2, q / 2.0), vq);
}

MomentCheckReport assemble_moment_report(int q, std::size_t n, std::size_t replicates,
                                         std::map<std::pair<int, int>, double> c_hat, double lhs, double slack)
{
    if (q < 2 || q % 2 != 0)
        throw DomainError(fmt::format("moment order q = {} must be an even integer >= 2", q));
    MomentCheckReport report;
    report.q = q;
    report.n = n;
    report.replicates = replicates;
    report.lhs = lhs;
    report.slack = slack;

    const auto lag_vector = [&](int k) {
        std::vector<double> c(n, 0.0);
        for (const auto& [key, value] : c_hat)
            if (key.first == k && key.second >= 0 && static_cast<std::size_t>(key.second) < n)
                c[static_cast<std::size_t>(key.second)] = value;
        return c;
    };
    for (int k : {2, q})
        report.v_hat[k] = v_statistic(n, k, lag_vector(k));
    report.c_hat = std::move(c_hat);
    report.rhs = moment_bound_rhs(q, report.v_hat[2], report.v_hat[q]);
    report.holds = report.lhs <= report.rhs * (1.0 + slack);
    return report;
}

MomentCheckReport verify_moment_inequality(const ProcessSpec& spec, double x, const KernelFamily& kernel, int m,
                                           int q, std::size_t n, std::size_t replicates, std::uint64_t seed,
                                           double slack, unsigned workers)
{
    if (q != 2 && q != 4)
        throw DomainError(fmt::format("moment order q = {} must be 2 or 4", q));
    if (n < 2 || n > covariance_window)
        throw DomainError(fmt::format("n = {} must lie in [2, {}] for brute-force covariance terms", n,
                                      covariance_window));
    if (replicates < 2)
        throw DomainError("at least two replicates are needed");

    const CenteredSample sample(spec, x, kernel, m, n, replicates, seed, workers);

    std::map<std::pair<int, int>, double> c_hat;
    for (int k : {2, q}) {
        if (c_hat.contains({k, 0}))
            continue;
        const auto table = covariance_table(sample, k);
        for (std::size_t r = 0; r < table.size(); ++r)
            c_hat[{k, static_cast<int>(r)}] = table[r].value;
    }

    std::vector<double> powers(replicates);
    for (std::size_t rep = 0; rep < replicates; ++rep)
        powers[rep] = std::pow(std::abs(sample.partial_sum(rep)), q);
    const double lhs = mean_of(powers);
    double ss = 0.0;
    for (double v : powers)
        ss += (v - lhs) * (v - lhs);

    MomentCheckReport report = assemble_moment_report(q, n, replicates, std::move(c_hat), lhs, slack);
    report.lhs_stderr = std::sqrt(ss / static_cast<double>(replicates - 1) / static_cast<double>(replicates));
    report.note = fmt::format("covariance supremum over indices 1..{}; population covariances replaced by "
                              "Monte Carlo estimates ({} replicates)",
                              n, replicates);
    if (spec.kind == ProcessKind::Sampled)
        report.note += "; sampled process is not stationary in general, so the windowed supremum may "
                       "undershoot the true C_k(r)";
    return report;
}

} // namespace wdde
