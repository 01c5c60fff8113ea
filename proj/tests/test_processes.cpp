#include "wdde/errors.hpp"
#include "wdde/processes.hpp"
#include "wdde/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace wdde;

namespace {

double ks_uniform(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        d = std::max(d, (i + 1) / n - v[i]);
        d = std::max(d, v[i] - i / n);
    }
    return d;
}

// gamma(h) = sigma^2 sum_i a_i a_{i+h}
double autocovariance(const CoefficientMap& a, int h, double sigma2)
{
    double s = 0.0;
    for (const auto& [i, ai] : a) {
        const auto it = a.find(i + h);
        if (it != a.end())
            s += ai * it->second;
    }
    return sigma2 * s;
}

} // namespace

TEST(Doubling, DirectRecursion)
{
    const Path p = simulate_doubling(3, 0.5, Fixed{{1, 0, 1}}, 0);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_DOUBLE_EQ(p[0], 0.75);
    EXPECT_DOUBLE_EQ(p[1], 0.375);
    EXPECT_DOUBLE_EQ(p[2], 0.6875);
}

TEST(Doubling, FixedPointAtZero)
{
    const Path p = simulate_doubling(1, 0.0, Fixed{{0}}, 0);
    EXPECT_EQ(p[0], 0.0);
}

TEST(Doubling, RejectsBadInputs)
{
    EXPECT_THROW(simulate_doubling(3, 1.5, Bernoulli{0.5}, 0), DomainError);
    EXPECT_THROW(simulate_doubling(3, -0.1, Bernoulli{0.5}, 0), DomainError);
    EXPECT_THROW(simulate_doubling(2, 0.5, Fixed{{1, 2}}, 0), DomainError);
    EXPECT_THROW(simulate_doubling(3, 0.5, Gaussian{}, 0), DomainError);
    EXPECT_THROW(simulate_doubling(3, 0.5, Bernoulli{0.3}, 0), DomainError);
}

TEST(Doubling, FixedSequenceExhausted)
{
    EXPECT_THROW(simulate_doubling(3, 0.5, Fixed{{1, 0}}, 0), DomainError);
}

TEST(Doubling, StaysInUnitInterval)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Path p = simulate_doubling(5000, std::nullopt, Bernoulli{0.5}, seed);
        for (double x : p.values()) {
            ASSERT_GE(x, 0.0);
            ASSERT_LE(x, 1.0);
        }
    }
}

TEST(Doubling, StationaryPathIsUniform)
{
    const std::size_t n = 100000;
    const Path p = simulate_doubling(n, std::nullopt, Bernoulli{0.5}, 42);
    std::vector<double> v(p.values().begin(), p.values().end());
    EXPECT_LT(ks_uniform(v), 1.95 / std::sqrt(static_cast<double>(n)));
}

TEST(Doubling, MarginalAtFixedTimeIsUniform)
{
    // 1.628 / sqrt(n): asymptotic KS critical value at level 0.99
    const std::size_t seeds = 10000;
    for (std::size_t t : {1u, 7u, 60u}) {
        std::vector<double> xt;
        for (std::size_t s = 0; s < seeds; ++s)
            xt.push_back(simulate_doubling(t, std::nullopt, Bernoulli{0.5}, derive_seed(1234, s))[t - 1]);
        EXPECT_LT(ks_uniform(xt), 1.628 / std::sqrt(static_cast<double>(seeds))) << "t = " << t;
    }
}

TEST(Linear, IdentityFilter)
{
    const Path p = simulate_linear(2, {{0, 1.0}}, Fixed{{5, 6}}, 0);
    EXPECT_EQ(p[0], 5.0);
    EXPECT_EQ(p[1], 6.0);
}

TEST(Linear, CenteredConvolution)
{
    const Path p = simulate_linear(1, {{-1, 0.25}, {0, 0.5}, {1, 0.25}}, Fixed{{1, 2, 3}}, 0);
    EXPECT_DOUBLE_EQ(p[0], 2.0);
}

TEST(Linear, OneSidedFilterUsesPastInnovations)
{
    // X_t = xi_t + 10 xi_{t-1}; draws are xi_0, xi_1, xi_2
    const Path p = simulate_linear(2, {{0, 1.0}, {1, 10.0}}, Fixed{{1, 2, 3}}, 0);
    EXPECT_DOUBLE_EQ(p[0], 2.0 + 10.0 * 1.0);
    EXPECT_DOUBLE_EQ(p[1], 3.0 + 10.0 * 2.0);
}

TEST(Linear, EmptyCoefficientsRejected)
{
    EXPECT_THROW(simulate_linear(5, {}, Gaussian{}, 0), DomainError);
}

TEST(Linear, PowerLawVariance)
{
    const CoefficientMap a = power_law_coefficients(5.0, 50);
    ASSERT_EQ(a.size(), 101u);
    EXPECT_EQ(a.at(0), 1.0);
    EXPECT_DOUBLE_EQ(a.at(-2), std::pow(2.0, -5.0));

    const std::size_t n = 100000;
    const Path p = simulate_linear(n, a, Gaussian{}, 7);
    double mean = 0.0;
    for (double x : p.values())
        mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : p.values())
        var += (x - mean) * (x - mean);
    var /= n - 1;

    // Var(s^2) ~ (2/n) sum_h gamma(h)^2 for a Gaussian series
    const double gamma0 = autocovariance(a, 0, 1.0);
    double sum_sq = 0.0;
    for (int h = -100; h <= 100; ++h)
        sum_sq += std::pow(autocovariance(a, h, 1.0), 2);
    const double se = std::sqrt(2.0 * sum_sq / n);
    EXPECT_NEAR(var, gamma0, 3.0 * se);
}

TEST(Linear, SymmetricMeanNearZero)
{
    const CoefficientMap a = power_law_coefficients(4.0, 20);
    double sum_a = 0.0;
    for (const auto& [i, ai] : a)
        sum_a += ai;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const std::size_t n = 50000;
        const Path p = simulate_linear(n, a, Uniform{-1.0, 1.0}, seed);
        double mean = 0.0;
        for (double x : p.values())
            mean += x;
        mean /= n;
        // long-run sd of the mean: sd(xi) * |sum a| / sqrt(n)
        const double sd_xi = 1.0 / std::sqrt(3.0);
        EXPECT_LT(std::abs(mean), 4.0 * sd_xi * sum_a / std::sqrt(static_cast<double>(n)));
    }
}

TEST(Linear, DeclaredGaussianDensity)
{
    const ProcessSpec spec = power_law_linear_process(5.0, 50);
    ASSERT_TRUE(spec.true_density.has_value());
    double sum_sq = 0.0;
    for (const auto& [i, ai] : power_law_coefficients(5.0, 50))
        sum_sq += ai * ai;
    const double f0 = 1.0 / std::sqrt(2.0 * std::numbers::pi * sum_sq);
    EXPECT_NEAR(spec.true_density->pdf(0.0), f0, 1e-14);
    EXPECT_NEAR(density_mass(*spec.true_density), 1.0, 1e-6);
}

TEST(Bilinear, TwoSteps)
{
    BilinearParams params;
    params.ar = {0.5};
    params.innovations = Fixed{{1, 1}};
    params.burn_in = 0;
    const Path p = simulate_bilinear(2, params, 0);
    EXPECT_DOUBLE_EQ(p[0], 1.0);
    EXPECT_DOUBLE_EQ(p[1], 1.5);
}

TEST(Bilinear, NoLagsIsIid)
{
    BilinearParams params;
    params.burn_in = 0;
    const Path p = simulate_bilinear(1000, params, 9);
    // same innovation stream as an i.i.d. Gaussian path
    const Path q = simulate(iid_process(Gaussian{}), 1000, 9);
    for (std::size_t i = 0; i < p.size(); ++i)
        EXPECT_EQ(p[i], q[i]);
}

TEST(Bilinear, StationarityBoundary)
{
    BilinearParams params;
    params.ar = {0.5};
    params.innovations = Gaussian{0.0, 0.9};
    EXPECT_NEAR(bilinear_lambda(params), 0.45, 1e-15);
    EXPECT_NO_THROW(simulate_bilinear(10, params, 1));
    params.innovations = Gaussian{0.0, 2.1};
    EXPECT_NEAR(bilinear_lambda(params), 1.05, 1e-15);
    EXPECT_THROW(simulate_bilinear(10, params, 1), StationarityError);
    EXPECT_THROW(bilinear_process(params), StationarityError);
}

TEST(Bilinear, RejectsExactlyLambdaAtLeastOne)
{
    // lambda = 0.5 sd + b_1 with p = 2 and centred Gaussian innovations
    for (double sd : {0.5, 1.0, 1.5}) {
        for (double b1 : {0.0, 0.2, 0.25, 0.3, 0.5, 0.7}) {
            BilinearParams params;
            params.ar = {0.5};
            params.ma = {b1};
            params.innovations = Gaussian{0.0, sd};
            params.burn_in = 10;
            const double lambda = 0.5 * sd + b1;
            if (lambda >= 1.0)
                EXPECT_THROW(simulate_bilinear(5, params, 1), StationarityError) << sd << " " << b1;
            else
                EXPECT_NO_THROW(simulate_bilinear(5, params, 1)) << sd << " " << b1;
        }
    }
}

TEST(Sampling, Arithmetic)
{
    const Path p({1, 2, 3, 4, 5, 6}, 0, "test");
    const Path s = sample_process(p, Arithmetic{2});
    EXPECT_EQ(std::vector<double>(s.values().begin(), s.values().end()), (std::vector<double>{2, 4, 6}));
}

TEST(Sampling, Geometric)
{
    const Path p({1, 2, 3, 4, 5, 6, 7, 8}, 0, "test");
    const Path s = sample_process(p, Geometric{2});
    EXPECT_EQ(std::vector<double>(s.values().begin(), s.values().end()), (std::vector<double>{2, 4, 8}));
}

TEST(Sampling, IdentityStride)
{
    const Path p({3, 1, 4, 1, 5}, 11, "test");
    const Path s = sample_process(p, Arithmetic{1});
    EXPECT_EQ(s.values().size(), p.size());
    EXPECT_TRUE(std::equal(s.values().begin(), s.values().end(), p.values().begin()));
}

TEST(Sampling, OutOfRange)
{
    const Path p({1, 2, 3, 4, 5, 6}, 0, "test");
    EXPECT_THROW(sample_process(p, Arithmetic{2}, 4), DomainError);
    EXPECT_THROW(sample_process(p, Arithmetic{7}), DomainError);
    EXPECT_THROW(sample_process(p, Geometric{2}, 3), DomainError);
}

TEST(Sampling, SampledSpecSimulates)
{
    const ProcessSpec spec = sampled_process(doubling_process(), Geometric{2});
    const Path p = simulate(spec, 10, 3);
    EXPECT_EQ(p.size(), 10u);
    // x_{2^i} of the base path
    const Path base = simulate(doubling_process(), 1024, 3);
    for (std::size_t i = 0; i < 10; ++i)
        EXPECT_EQ(p[i], base[(std::size_t{1} << (i + 1)) - 1]);
}

TEST(Innovations, AbsoluteMoments)
{
    EXPECT_NEAR(innovation_abs_moment(Gaussian{0.0, 1.0}), std::sqrt(2.0 / std::numbers::pi), 1e-14);
    EXPECT_NEAR(innovation_abs_moment(Gaussian{0.0, 2.0}, 2.0), 4.0, 1e-12);
    // E|X| for N(mu, s): s sqrt(2/pi) exp(-mu^2 / 2s^2) + mu erf(mu / (s sqrt 2))
    const double mu = 1.0;
    const double s = 1.5;
    const double expected =
        s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-mu * mu / (2 * s * s)) + mu * std::erf(mu / (s * std::sqrt(2.0)));
    EXPECT_NEAR(innovation_abs_moment(Gaussian{mu, s}), expected, 1e-9);
    EXPECT_NEAR(innovation_abs_moment(Uniform{-1.0, 3.0}), 1.25, 1e-14);
    EXPECT_NEAR(innovation_abs_moment(Bernoulli{0.5}), 0.5, 1e-15);
    EXPECT_NEAR(innovation_abs_moment(Fixed{{-2, 1, 4}}), 7.0 / 3.0, 1e-15);
    EXPECT_NEAR(innovation_norm(Uniform{-1.0, 1.0}, 2.0), 1.0 / std::sqrt(3.0), 1e-14);
}

TEST(Innovations, FixedConsumedInOrder)
{
    Rng rng(0);
    const InnovationSpec spec = Fixed{{4, 5}};
    InnovationSource src(spec, rng);
    EXPECT_EQ(src.next(), 4.0);
    EXPECT_EQ(src.next(), 5.0);
    EXPECT_THROW(src.next(), DomainError);
}

TEST(Specs, DensitiesIntegrateToOne)
{
    const std::vector<ProcessSpec> specs{
        doubling_process(),
        power_law_linear_process(5.0, 50),
        linear_process({{0, 1.0}, {1, 0.5}}, Gaussian{1.0, 2.0}),
        iid_process(Gaussian{0.5, 0.3}),
        iid_process(Uniform{-2.0, 5.0}),
        sampled_process(doubling_process(), Arithmetic{3}),
    };
    for (const auto& spec : specs) {
        ASSERT_TRUE(spec.true_density.has_value()) << spec.id();
        EXPECT_NEAR(density_mass(*spec.true_density), 1.0, 1e-6) << spec.id();
        EXPECT_NO_THROW(validate(spec)) << spec.id();
    }
}

TEST(Specs, DoublingDeclaresGeometricPhi)
{
    const ProcessSpec spec = doubling_process();
    ASSERT_TRUE(spec.dependence.has_value());
    EXPECT_EQ(spec.dependence->coefficient, DependenceCoefficient::PhiTilde);
    EXPECT_TRUE(spec.dependence->is_geometric());
    EXPECT_TRUE(spec.dynamical_system);
}

TEST(Specs, InconsistentDependenceRejected)
{
    ProcessSpec spec = doubling_process();
    spec.dependence->coefficient = DependenceCoefficient::Eta;
    EXPECT_THROW(validate(spec), DomainError);
}

TEST(Specs, BadDensityRejected)
{
    ProcessSpec spec = iid_process(Uniform{0.0, 1.0});
    spec.true_density->pdf = [](double) { return 2.0; };
    EXPECT_THROW(validate(spec), DomainError);
}

TEST(Specs, Reproducible)
{
    const std::vector<ProcessSpec> specs{
        doubling_process(),
        power_law_linear_process(5.0, 10),
        bilinear_process(BilinearParams{1.0, 0.1, {0.3}, {0.2}, Gaussian{}, 100, 2.0}),
        iid_process(Uniform{}),
        sampled_process(power_law_linear_process(3.0, 5), Arithmetic{2}),
    };
    for (const auto& spec : specs) {
        const Path a = simulate(spec, 500, 77);
        const Path b = simulate(spec, 500, 77);
        const Path c = simulate(spec, 500, 78);
        EXPECT_EQ(a, b) << spec.id();
        EXPECT_NE(a.values()[0], c.values()[0]) << spec.id();
        EXPECT_EQ(a.spec_id(), spec.id());
        EXPECT_EQ(spec.id().find(','), std::string::npos);
    }
}

TEST(Spec, IdsSeparateParameterSets)
{
    EXPECT_NE(power_law_linear_process(5.0, 50).id(), power_law_linear_process(6.0, 50).id());
    EXPECT_EQ(power_law_linear_process(5.0, 50).id(), power_law_linear_process(5.0, 50).id());
    EXPECT_NE(iid_process(Uniform{0.0, 1.0}).id(), iid_process(Uniform{0.0, 2.0}).id());
    EXPECT_NE(bilinear_process(BilinearParams{1.0, 0.1, {0.3}, {0.2}, Gaussian{}, 100, 2.0}).id(),
              bilinear_process(BilinearParams{1.0, 0.1, {0.3}, {0.25}, Gaussian{}, 100, 2.0}).id());
    EXPECT_EQ(doubling_process().id(), "doubling");
}

TEST(Paths, EmptyRejected)
{
    EXPECT_THROW(Path({}, 0, "x"), DomainError);
}
