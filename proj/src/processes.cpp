#include "wdde/processes.hpp"

#include "wdde/errors.hpp"
#include "wdde/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace wdde {

namespace {

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};

double gaussian_pdf(double x, double mean, double sd)
{
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

MarginalDensity gaussian_density(double mean, double sd)
{
    return MarginalDensity{[mean, sd](double x) { return gaussian_pdf(x, mean, sd); }, mean - 12.0 * sd,
                           mean + 12.0 * sd, std::numeric_limits<double>::infinity()};
}

MarginalDensity uniform_density(double lo, double hi)
{
    const double height = 1.0 / (hi - lo);
    return MarginalDensity{[lo, hi, height](double x) { return (x >= lo && x <= hi) ? height : 0.0; }, lo, hi,
                           std::nullopt};
}

// Integral of |x|^p over [lo, hi].
double abs_power_integral(double lo, double hi, double p)
{
    const auto antiderivative = [p](double t) {
        return std::copysign(std::pow(std::abs(t), p + 1.0) / (p + 1.0), t);
    };
    return antiderivative(hi) - antiderivative(lo);
}

void check_doubling_innovation(double eps)
{
    if (eps != 0.0 && eps != 1.0)
        throw DomainError(fmt::format("doubling chain: innovation {} is not in {{0, 1}}", eps));
}

} // namespace

// ---------------------------------------------------------------------------

InnovationSource::InnovationSource(const InnovationSpec& spec, Rng& rng)
    : spec_(spec)
    , rng_(rng)
{
}

double InnovationSource::next()
{
    return std::visit(overloaded{
                          [this](const Bernoulli& b) { return rng_.uniform() < b.p ? 1.0 : 0.0; },
                          [this](const Gaussian& g) { return g.mean + g.sd * rng_.normal(); },
                          [this](const Uniform& u) { return u.lo + (u.hi - u.lo) * rng_.uniform(); },
                          [this](const Fixed& f) {
                              if (cursor_ >= f.values.size())
                                  throw DomainError(fmt::format("fixed innovation sequence exhausted after {} values",
                                                                f.values.size()));
                              return f.values[cursor_++];
                          },
                      },
                      spec_);
}

double innovation_abs_moment(const InnovationSpec& spec, double p)
{
    if (!(p > 0.0))
        throw DomainError("innovation moment order must be positive");
    return std::visit(
        overloaded{
            [p](const Bernoulli& b) { return b.p; },
            [p](const Gaussian& g) {
                if (g.sd == 0.0)
                    return std::pow(std::abs(g.mean), p);
                if (g.mean == 0.0)
                    return std::pow(g.sd, p) * std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) /
                           std::sqrt(std::numbers::pi);
                const auto integrand = [&](double x) { return std::pow(std::abs(x), p) * gaussian_pdf(x, g.mean, g.sd); };
                const double lo = g.mean - 12.0 * g.sd;
                const double hi = g.mean + 12.0 * g.sd;
                // split at the kink of |x|^p
                if (lo < 0.0 && hi > 0.0)
                    return simpson(integrand, lo, 0.0, 20000) + simpson(integrand, 0.0, hi, 20000);
                return simpson(integrand, lo, hi, 20000);
            },
            [p](const Uniform& u) { return abs_power_integral(u.lo, u.hi, p) / (u.hi - u.lo); },
            [p](const Fixed& f) {
                if (f.values.empty())
                    throw DomainError("empty fixed innovation sequence");
                double s = 0.0;
                for (double v : f.values)
                    s += std::pow(std::abs(v), p);
                return s / static_cast<double>(f.values.size());
            },
        },
        spec);
}

double innovation_norm(const InnovationSpec& spec, double p)
{
    return std::pow(innovation_abs_moment(spec, p), 1.0 / p);
}

std::string describe(const InnovationSpec& spec)
{
    return std::visit(overloaded{
                          [](const Bernoulli& b) { return fmt::format("bernoulli({})", b.p); },
                          [](const Gaussian& g) { return fmt::format("gaussian({}, {})", g.mean, g.sd); },
                          [](const Uniform& u) { return fmt::format("uniform({}, {})", u.lo, u.hi); },
                          [](const Fixed& f) { return fmt::format("fixed({})", fmt::join(f.values, ", ")); },
                      },
                      spec);
}

// ---------------------------------------------------------------------------

Path::Path(std::vector<double> values, std::uint64_t seed, std::string spec_id)
    : values_(std::move(values))
    , seed_(seed)
    , spec_id_(std::move(spec_id))
{
    if (values_.empty())
        throw DomainError("a path must contain at least one value");
}

CoefficientMap power_law_coefficients(double decay, int radius)
{
    if (radius < 0)
        throw DomainError("coefficient radius must be nonnegative");
    CoefficientMap coeffs{{0, 1.0}};
    for (int i = 1; i <= radius; ++i) {
        const double a = std::pow(static_cast<double>(i), -decay);
        coeffs[i] = a;
        coeffs[-i] = a;
    }
    return coeffs;
}

Path simulate_doubling(std::size_t n, std::optional<double> x0, const InnovationSpec& innovations,
                       std::uint64_t seed)
{
    if (n == 0)
        throw DomainError("doubling chain: n must be at least 1");
    if (const auto* b = std::get_if<Bernoulli>(&innovations); b && b->p != 0.5)
        throw DomainError("doubling chain: Bernoulli innovations must have p = 1/2");
    if (std::holds_alternative<Gaussian>(innovations) || std::holds_alternative<Uniform>(innovations))
        throw DomainError("doubling chain: innovations must be Bernoulli(1/2) or fixed values in {0, 1}");

    Rng rng(seed);
    double x = 0.0;
    if (x0) {
        if (!(*x0 >= 0.0 && *x0 <= 1.0))
            throw DomainError(fmt::format("doubling chain: x0 = {} is outside [0, 1]", *x0));
        x = *x0;
    } else {
        x = rng.uniform();
    }

    InnovationSource eps(innovations, rng);
    std::vector<double> values(n);
    for (auto& v : values) {
        const double e = eps.next();
        check_doubling_innovation(e);
        x = 0.5 * (x + e);
        v = x;
    }
    return Path(std::move(values), seed, "doubling");
}

Path simulate_linear(std::size_t n, const CoefficientMap& coeffs, const InnovationSpec& innovations,
                     std::uint64_t seed)
{
    if (coeffs.empty())
        throw DomainError("linear process: empty coefficient map");
    if (n == 0)
        throw DomainError("linear process: n must be at least 1");

    const int lo = coeffs.begin()->first;
    const int hi = coeffs.rbegin()->first;
    const std::size_t span = static_cast<std::size_t>(hi - lo);

    Rng rng(seed);
    InnovationSource source(innovations, rng);
    // xi[j] holds the innovation with time index 1 - hi + j
    std::vector<double> xi(n + span);
    for (auto& v : xi)
        v = source.next();

    // Dense reversed filter so the inner loop is a contiguous dot product:
    // X_t = sum_{i=lo}^{hi} a_i xi[t - 1 + hi - i] = sum_{j=0}^{span} w_j xi[t - 1 + j], w_j = a_{hi-j}.
    std::vector<double> w(span + 1, 0.0);
    for (const auto& [offset, a] : coeffs)
        w[static_cast<std::size_t>(hi - offset)] = a;

    std::vector<double> values(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double* window = xi.data() + t;
        double s = 0.0;
        for (std::size_t j = 0; j <= span; ++j)
            s += w[j] * window[j];
        values[t] = s;
    }
    return Path(std::move(values), seed, "linear");
}

double bilinear_lambda(const BilinearParams& params)
{
    const auto abs_sum = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0, [](double s, double x) { return s + std::abs(x); });
    };
    const double ar = abs_sum(params.ar);
    const double norm = ar == 0.0 ? 0.0 : innovation_norm(params.innovations, params.p);
    return norm * ar + abs_sum(params.ma);
}

Path simulate_bilinear(std::size_t n, const BilinearParams& params, std::uint64_t seed)
{
    if (n == 0)
        throw DomainError("bilinear process: n must be at least 1");
    if (!(params.p > 0.0))
        throw DomainError("bilinear process: moment order p must be positive");
    const double lambda = bilinear_lambda(params);
    if (!(lambda < 1.0))
        throw StationarityError(
            fmt::format("bilinear process: lambda = {} >= 1, no stationary solution guaranteed", lambda));

    Rng rng(seed);
    InnovationSource source(params.innovations, rng);
    const std::size_t total = params.burn_in + n;
    std::vector<double> x(total, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        double scale = params.a;
        for (std::size_t j = 1; j <= params.ar.size() && j <= t; ++j)
            scale += params.ar[j - 1] * x[t - j];
        double drift = params.b;
        for (std::size_t j = 1; j <= params.ma.size() && j <= t; ++j)
            drift += params.ma[j - 1] * x[t - j];
        x[t] = source.next() * scale + drift;
    }
    std::vector<double> values(x.begin() + static_cast<std::ptrdiff_t>(params.burn_in), x.end());
    return Path(std::move(values), seed, "bilinear");
}

std::string describe(const Stride& stride)
{
    return std::visit(overloaded{
                          [](const Arithmetic& a) { return fmt::format("arithmetic({})", a.step); },
                          [](const Geometric& g) { return fmt::format("geometric({})", g.base); },
                      },
                      stride);
}

std::size_t stride_index(const Stride& stride, std::size_t i)
{
    constexpr std::size_t limit = std::numeric_limits<std::size_t>::max();
    return std::visit(overloaded{
                          [i](const Arithmetic& a) {
                              if (a.step == 0)
                                  throw DomainError("arithmetic stride must be at least 1");
                              if (i > limit / a.step)
                                  throw DomainError("sampling index overflows");
                              return a.step * i;
                          },
                          [i](const Geometric& g) {
                              if (g.base < 2)
                                  throw DomainError("geometric stride base must be at least 2");
                              std::size_t h = 1;
                              for (std::size_t k = 0; k < i; ++k) {
                                  if (h > limit / g.base)
                                      throw DomainError("sampling index overflows");
                                  h *= g.base;
                              }
                              return h;
                          },
                      },
                      stride);
}

Path sample_process(const Path& path, const Stride& stride, std::optional<std::size_t> count)
{
    const std::size_t len = path.size();
    std::size_t k = 0;
    if (count) {
        if (*count == 0)
            throw DomainError("sampled process: count must be at least 1");
        const std::size_t last = stride_index(stride, *count);
        if (last > len)
            throw DomainError(fmt::format("sampled process: index {} outside a path of length {}", last, len));
        k = *count;
    } else {
        k = std::visit(overloaded{
                           [len](const Arithmetic& a) {
                               if (a.step == 0)
                                   throw DomainError("arithmetic stride must be at least 1");
                               return len / a.step;
                           },
                           [len](const Geometric& g) {
                               if (g.base < 2)
                                   throw DomainError("geometric stride base must be at least 2");
                               std::size_t fits = 0;
                               for (std::size_t h = g.base; h <= len; h *= g.base) {
                                   ++fits;
                                   if (h > len / g.base)
                                       break;
                               }
                               return fits;
                           },
                       },
                       stride);
        if (k == 0)
            throw DomainError(fmt::format("sampled process: no sampling index fits a path of length {}", len));
    }

    std::vector<double> values(k);
    for (std::size_t i = 1; i <= k; ++i)
        values[i - 1] = path[stride_index(stride, i) - 1];
    return Path(std::move(values), path.seed(), fmt::format("sampled:{}:{}", path.spec_id(), describe(stride)));
}

// ---------------------------------------------------------------------------

std::string to_string(ProcessKind kind)
{
    switch (kind) {
    case ProcessKind::Doubling:
        return "doubling";
    case ProcessKind::Linear:
        return "linear";
    case ProcessKind::Bilinear:
        return "bilinear";
    case ProcessKind::Sampled:
        return "sampled";
    case ProcessKind::IidBaseline:
        return "iid";
    }
    return "unknown";
}

bool SampledParams::operator==(const SampledParams& other) const
{
    if (stride != other.stride)
        return false;
    if (!base || !other.base)
        return base == other.base;
    return *base == *other.base;
}

namespace {

std::string innovation_key(const InnovationSpec& spec)
{
    return std::visit(overloaded{
                          [](const Bernoulli& b) { return fmt::format("b{}", b.p); },
                          [](const Gaussian& g) { return fmt::format("g{}/{}", g.mean, g.sd); },
                          [](const Uniform& u) { return fmt::format("u{}/{}", u.lo, u.hi); },
                          [](const Fixed& f) { return fmt::format("f{}", fmt::join(f.values, "/")); },
                      },
                      spec);
}

// 32-bit FNV-1a, printed as 8 hex digits
std::string fingerprint(const std::string& text)
{
    std::uint32_t h = 2166136261u;
    for (unsigned char c : text) {
        h ^= c;
        h *= 16777619u;
    }
    return fmt::format("{:08x}", h);
}

} // namespace

std::string ProcessSpec::id() const
{
    const auto law_name = [](const InnovationSpec& s) {
        static constexpr const char* names[] = {"bernoulli", "gaussian", "uniform", "fixed"};
        return std::string(names[s.index()]);
    };
    return std::visit(overloaded{
                          [](const DoublingParams&) { return std::string("doubling"); },
                          [&](const LinearParams& p) {
                              std::string key = innovation_key(p.innovations);
                              for (const auto& [offset, a] : p.coeffs)
                                  key += fmt::format(";{}:{}", offset, a);
                              return fmt::format("linear:{}:{}..{}#{}", law_name(p.innovations),
                                                 p.coeffs.empty() ? 0 : p.coeffs.begin()->first,
                                                 p.coeffs.empty() ? 0 : p.coeffs.rbegin()->first, fingerprint(key));
                          },
                          [&](const BilinearParams& p) {
                              const std::string key =
                                  fmt::format("{};{};{};{};{};{};{}", innovation_key(p.innovations), p.a, p.b,
                                              fmt::join(p.ar, "/"), fmt::join(p.ma, "/"), p.burn_in, p.p);
                              return fmt::format("bilinear:{}#{}", law_name(p.innovations), fingerprint(key));
                          },
                          [&](const SampledParams& p) {
                              return fmt::format("sampled:{}:{}", p.base ? p.base->id() : "none", describe(p.stride));
                          },
                          [&](const IidParams& p) {
                              return fmt::format("iid:{}#{}", law_name(p.innovations),
                                                 fingerprint(innovation_key(p.innovations)));
                          },
                      },
                      params);
}

ProcessSpec make_process(const ProcessParams& params, std::optional<DependenceBound> dependence)
{
    ProcessSpec spec;
    spec.params = params;
    std::visit(overloaded{
                   [&](const DoublingParams&) {
                       spec.kind = ProcessKind::Doubling;
                       spec.true_density = uniform_density(0.0, 1.0);
                       // contraction by 1/2 per step: C = 1, a = ln 2
                       spec.dependence = DependenceBound{DependenceCoefficient::PhiTilde,
                                                         GeometricDecay{std::numbers::ln2, 1.0}, 1.0};
                       spec.dynamical_system = true;
                   },
                   [&](const LinearParams& p) {
                       spec.kind = ProcessKind::Linear;
                       if (const auto* g = std::get_if<Gaussian>(&p.innovations)) {
                           double sum = 0.0;
                           double sum_sq = 0.0;
                           for (const auto& [offset, a] : p.coeffs) {
                               sum += a;
                               sum_sq += a * a;
                           }
                           spec.true_density = gaussian_density(g->mean * sum, g->sd * std::sqrt(sum_sq));
                           spec.joint_densities_bounded = true;
                       }
                   },
                   [&](const BilinearParams&) { spec.kind = ProcessKind::Bilinear; },
                   [&](const SampledParams& p) {
                       spec.kind = ProcessKind::Sampled;
                       if (!p.base)
                           throw DomainError("sampled process without a base process");
                       spec.true_density = p.base->true_density;
                       // lags of the sampled series are at least as long as the base lags
                       spec.dependence = p.base->dependence;
                       spec.joint_densities_bounded = p.base->joint_densities_bounded;
                       spec.dynamical_system = p.base->dynamical_system;
                   },
                   [&](const IidParams& p) {
                       spec.kind = ProcessKind::IidBaseline;
                       if (const auto* g = std::get_if<Gaussian>(&p.innovations))
                           spec.true_density = gaussian_density(g->mean, g->sd);
                       else if (const auto* u = std::get_if<Uniform>(&p.innovations))
                           spec.true_density = uniform_density(u->lo, u->hi);
                       spec.joint_densities_bounded = spec.true_density.has_value();
                   },
               },
               params);
    if (dependence)
        spec.dependence = dependence;
    return spec;
}

ProcessSpec doubling_process(std::optional<double> x0)
{
    return make_process(DoublingParams{x0, Bernoulli{0.5}});
}

ProcessSpec linear_process(CoefficientMap coeffs, InnovationSpec innovations, std::optional<DependenceBound> dependence)
{
    if (coeffs.empty())
        throw DomainError("linear process: empty coefficient map");
    return make_process(LinearParams{std::move(coeffs), std::move(innovations)}, dependence);
}

ProcessSpec power_law_linear_process(double decay, int radius, InnovationSpec innovations)
{
    if (!(decay > 2.0))
        throw DomainError("power-law linear process: decay exponent must exceed 2");
    // eta_r = 2 delta_{ceil(r/2)} <= E|xi| * 2^(A+1) * A / (A - 1) * r^(1 - A)
    const double abs_mean = innovation_abs_moment(innovations, 1.0);
    const double constant = abs_mean * std::pow(2.0, decay + 1.0) * decay / (decay - 1.0);
    return linear_process(power_law_coefficients(decay, radius), std::move(innovations),
                          DependenceBound{DependenceCoefficient::Eta, RiemannianDecay{decay - 1.0}, constant});
}

ProcessSpec bilinear_process(BilinearParams params, std::optional<DependenceBound> dependence)
{
    const double lambda = bilinear_lambda(params);
    if (!(lambda < 1.0))
        throw StationarityError(fmt::format("bilinear process: lambda = {} >= 1", lambda));
    return make_process(std::move(params), dependence);
}

ProcessSpec iid_process(InnovationSpec innovations)
{
    return make_process(IidParams{std::move(innovations)});
}

ProcessSpec sampled_process(ProcessSpec base, Stride stride)
{
    return make_process(SampledParams{std::make_shared<const ProcessSpec>(std::move(base)), stride});
}

double density_mass(const MarginalDensity& density)
{
    return simpson(density.pdf, density.lo, density.hi, 10000);
}

void validate(const ProcessSpec& spec)
{
    if (spec.true_density) {
        const double mass = density_mass(*spec.true_density);
        if (std::abs(mass - 1.0) > 1e-6)
            throw DomainError(fmt::format("{}: declared density integrates to {}", spec.id(), mass));
    }
    if (spec.dependence) {
        spec.dependence->validate();
        ProcessKind kind = spec.kind;
        if (const auto* s = std::get_if<SampledParams>(&spec.params); s && s->base)
            kind = s->base->kind;
        const auto coefficient = spec.dependence->coefficient;
        if (kind == ProcessKind::Doubling &&
            !(coefficient == DependenceCoefficient::PhiTilde && spec.dependence->is_geometric()))
            throw DomainError("doubling chain declares geometric phi~ decay");
        if ((kind == ProcessKind::Linear || kind == ProcessKind::Bilinear) && coefficient != DependenceCoefficient::Eta)
            throw DomainError("Bernoulli shifts declare eta decay");
    }
}

Path simulate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed)
{
    // Largest base path a geometric sampling scheme may request.
    constexpr std::size_t max_base_length = std::size_t{1} << 26;

    return std::visit(overloaded{
                          [&](const DoublingParams& p) {
                              return simulate_doubling(n, p.x0, p.innovations, seed).with_id(spec.id());
                          },
                          [&](const LinearParams& p) {
                              return simulate_linear(n, p.coeffs, p.innovations, seed).with_id(spec.id());
                          },
                          [&](const BilinearParams& p) { return simulate_bilinear(n, p, seed).with_id(spec.id()); },
                          [&](const SampledParams& p) {
                              if (!p.base)
                                  throw DomainError("sampled process without a base process");
                              const std::size_t needed = stride_index(p.stride, n);
                              if (needed > max_base_length)
                                  throw DomainError(fmt::format(
                                      "sampled process: {} samples need a base path of length {}", n, needed));
                              Path base = simulate(*p.base, needed, seed);
                              return sample_process(base, p.stride, n).with_id(spec.id());
                          },
                          [&](const IidParams& p) {
                              if (n == 0)
                                  throw DomainError("iid baseline: n must be at least 1");
                              Rng rng(seed);
                              InnovationSource source(p.innovations, rng);
                              std::vector<double> values(n);
                              for (auto& v : values)
                                  v = source.next();
                              return Path(std::move(values), seed, spec.id());
                          },
                      },
                      spec.params);
}

} // namespace wdde
