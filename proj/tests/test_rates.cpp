#include "wdde/errors.hpp"
#include "wdde/rates.hpp"
#include "wdde/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace wdde;

namespace {

RateParams riemannian(Theorem t, double rho, double a, DependenceCoefficient c = DependenceCoefficient::Eta, int q = 2)
{
    return RateParams{rho, 1, DependenceBound{c, RiemannianDecay{a}, 1.0}, q, t};
}

RateParams geometric(Theorem t, double rho, double b)
{
    return RateParams{rho, 1, DependenceBound{DependenceCoefficient::Eta, GeometricDecay{1.0, b}, 1.0}, 2, t};
}

const Hypothesis* find(const AdmissibilityReport& r, const std::string& prefix)
{
    for (const auto& h : r.hypotheses)
        if (h.name.rfind(prefix, 0) == 0)
            return &h;
    return nullptr;
}

} // namespace

TEST(Q0, Examples)
{
    EXPECT_EQ(q0_of(5.0), 4);
    EXPECT_EQ(q0_of(4.0), 4);
    EXPECT_EQ(q0_of(2.5), 2);
    EXPECT_EQ(q0_of(3.0), 2);
    EXPECT_EQ(q0_of(1.0 + 1e-12), 2);
    EXPECT_THROW(q0_of(1.0), DomainError);
    EXPECT_THROW(q0_of(0.5), DomainError);
}

TEST(Q0, BracketsA)
{
    Rng rng(2024);
    for (int i = 0; i < 10000; ++i) {
        const double a = 1.0 + 99.0 * rng.uniform();
        if (a <= 1.0)
            continue;
        const int q0 = q0_of(a);
        EXPECT_EQ(q0 % 2, 0);
        EXPECT_GE(q0, 2);
        EXPECT_LE(a - 1.0, q0);
        EXPECT_LT(q0, a + 1.0);
    }
}

TEST(RateExponent, Examples)
{
    const RateResult t1 = rate_exponent(geometric(Theorem::T1, 2.0, 1.0));
    EXPECT_NEAR(t1.exponent, 0.4, 1e-9);
    EXPECT_EQ(t1.log_power, 0.0);

    const RateResult t2 = rate_exponent(geometric(Theorem::T2, 2.0, 1.0));
    EXPECT_NEAR(t2.exponent, 0.4, 1e-9);
    EXPECT_NEAR(t2.log_power, 1.6, 1e-9);

    const RateResult t3 = rate_exponent(riemannian(Theorem::T3Mean, 3.0, 4.0));
    EXPECT_NEAR(t3.exponent, 3.0 / (1.0 + 6.0 + 2.0 / 5.0), 1e-9);
    EXPECT_NEAR(t3.exponent, 0.405405405405, 1e-9);
}

TEST(RateExponent, AlmostSureUniform)
{
    // q0 = 4, d(q0+2) + rho(q0+d) = 6 + 15
    const RateResult r = rate_exponent(riemannian(Theorem::T3AlmostSure, 3.0, 4.0));
    EXPECT_NEAR(r.exponent, 6.0 / 21.0, 1e-12);
    EXPECT_NEAR(r.log_power, 15.0 / 21.0, 1e-12);
    EXPECT_NEAR(r.bandwidth.delta(), 2.0 / 21.0, 1e-12);
    EXPECT_NEAR(r.bandwidth.gamma(), -5.0 / 21.0, 1e-12);
}

TEST(RateExponent, ExponentInUnitInterval)
{
    for (double rho : {0.5, 1.0, 2.0, 5.0, 50.0})
        for (double b : {0.1, 1.0, 10.0}) {
            for (Theorem t : {Theorem::T1, Theorem::T2}) {
                const double e = rate_exponent(geometric(t, rho, b)).exponent;
                EXPECT_GT(e, 0.0);
                EXPECT_LT(e, 1.0);
            }
        }
    for (double rho : {2.5, 3.0, 10.0})
        for (double a : {4.0, 7.5, 40.0})
            for (Theorem t : {Theorem::T3Mean, Theorem::T3AlmostSure}) {
                const double e = rate_exponent(riemannian(t, rho, a)).exponent;
                EXPECT_GT(e, 0.0);
                EXPECT_LT(e, 1.0);
            }
}

TEST(OptimalBandwidth, Examples)
{
    EXPECT_EQ(optimal_bandwidth(geometric(Theorem::T1, 2.0, 1.0), 1024), 4);
    EXPECT_EQ(optimal_bandwidth(geometric(Theorem::T1, 2.0, 1.0), 2), 1);
    EXPECT_EQ(optimal_bandwidth(geometric(Theorem::T2, 2.0, 1.0), 1024), 1);
    const double raw = std::pow(1024.0 / std::pow(std::log(1024.0), 4.0), 0.2);
    EXPECT_NEAR(rate_exponent(geometric(Theorem::T2, 2.0, 1.0)).bandwidth.raw(1024), raw, 1e-12);
    EXPECT_THROW(optimal_bandwidth(geometric(Theorem::T1, 2.0, 1.0), 1), DomainError);
    EXPECT_THROW(optimal_bandwidth(geometric(Theorem::T1, 2.0, 1.0), 0), DomainError);
}

TEST(OptimalBandwidth, NondecreasingPolynomialRules)
{
    for (const RateParams& p : {geometric(Theorem::T1, 2.0, 1.0), geometric(Theorem::T1, 0.7, 1.0),
                                riemannian(Theorem::T3Mean, 3.0, 4.0), riemannian(Theorem::T3Mean, 2.5, 400.0)}) {
        int prev = optimal_bandwidth(p, 2);
        for (int k = 2; k <= 30; ++k) {
            const int m = optimal_bandwidth(p, std::size_t{1} << k);
            EXPECT_GE(m, prev) << to_string(p.theorem) << " k=" << k;
            prev = m;
        }
    }
}

TEST(OptimalBandwidth, NondecreasingLogRulesPastTurningPoint)
{
    // n^alpha / ln(n)^beta increases once ln n >= beta / alpha
    for (const RateParams& p : {geometric(Theorem::T2, 2.0, 1.0), geometric(Theorem::T2, 1.0, 0.5),
                                riemannian(Theorem::T3AlmostSure, 3.0, 4.0),
                                riemannian(Theorem::T3AlmostSure, 5.0, 9.0)}) {
        const BandwidthRule rule = rate_exponent(p).bandwidth;
        const double turning = std::exp(rule.log_power / rule.num_power);
        int prev = 0;
        for (int k = 1; k <= 30; ++k) {
            const std::size_t n = std::size_t{1} << k;
            if (static_cast<double>(n) < turning)
                continue;
            const int m = optimal_bandwidth(p, n);
            EXPECT_GE(m, prev) << to_string(p.theorem) << " k=" << k;
            prev = m;
        }
    }
}

TEST(OptimalBandwidth, SmallNLogRuleDips)
{
    // below the turning point the T2 rule still decreases: (2/ln^4 2)^0.2 rounds to 2, at n = 4 to 1
    const RateParams p = geometric(Theorem::T2, 2.0, 1.0);
    EXPECT_EQ(optimal_bandwidth(p, 2), 2);
    EXPECT_EQ(optimal_bandwidth(p, 4), 1);
}

TEST(Rates, UniformRiemannianRateIsWorse)
{
    const double rho = 3.0;
    const double limit = rho / (2.0 * rho + 1.0);
    double prev_gap = 1.0;
    for (double a : {4.0, 40.0, 400.0}) {
        const double t1 = rate_exponent(riemannian(Theorem::T1, rho, a)).exponent;
        const double t3 = rate_exponent(riemannian(Theorem::T3Mean, rho, a)).exponent;
        EXPECT_GT(t1, t3) << "a = " << a;
        EXPECT_NEAR(t1, limit, 1e-15);
        const double gap = limit - t3;
        EXPECT_GT(gap, 0.0);
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 1e-3);

    for (double r : {2.5, 4.0, 8.0})
        for (double a : {4.0, 5.5, 9.0, 20.0}) {
            const double t1 = rate_exponent(riemannian(Theorem::T1, r, a)).exponent;
            const double t3 = rate_exponent(riemannian(Theorem::T3Mean, r, a)).exponent;
            EXPECT_GT(t1, t3);
        }
}

TEST(Rates, GeometricLogLossVanishesForLargeShape)
{
    const double rho = 2.0;
    const RateResult r = rate_exponent(geometric(Theorem::T2, rho, 1e6));
    EXPECT_LT(r.log_power, 1e-5 + 2.0 * rho / (2.0 * rho + 1.0));
    EXPECT_NEAR(r.log_power, 2.0 * rho / (2.0 * rho + 1.0), 1e-5);
}

TEST(Admissibility, EtaThresholdPasses)
{
    const auto report = check_admissibility(riemannian(Theorem::T1, 2.0, 5.0));
    const Hypothesis* h = find(report, "T1 eta");
    ASSERT_NE(h, nullptr);
    EXPECT_DOUBLE_EQ(h->threshold, 4.0);
    EXPECT_EQ(h->value, 5.0);
    EXPECT_TRUE(h->satisfied);
    EXPECT_TRUE(report.admissible);
}

TEST(Admissibility, PhiThresholdFails)
{
    const auto params = riemannian(Theorem::T1, 2.0, 3.0, DependenceCoefficient::PhiTilde);
    const auto report = check_admissibility(params);
    const Hypothesis* h = find(report, "T1 phi~");
    ASSERT_NE(h, nullptr);
    EXPECT_DOUBLE_EQ(h->threshold, 3.5);
    EXPECT_FALSE(h->satisfied);
    EXPECT_FALSE(report.admissible);
    EXPECT_NE(report.to_text().find("not admissible"), std::string::npos);
    EXPECT_THROW(rate_exponent(params), HypothesisError);
    EXPECT_THROW(optimal_bandwidth(params, 1024), HypothesisError);
}

TEST(Admissibility, GeometricDecayIsVacuous)
{
    for (Theorem t : {Theorem::T1, Theorem::T2}) {
        const auto report = check_admissibility(geometric(t, 2.0, 0.3));
        EXPECT_TRUE(report.admissible);
        for (const auto& h : report.hypotheses)
            EXPECT_EQ(h.name.find("a >"), std::string::npos) << h.name;
    }
}

TEST(Admissibility, TheoremThreeHypotheses)
{
    EXPECT_THROW(rate_exponent(riemannian(Theorem::T3Mean, 3.0, 3.9)), HypothesisError);
    EXPECT_THROW(rate_exponent(riemannian(Theorem::T3Mean, 2.0, 5.0)), HypothesisError);
    EXPECT_THROW(rate_exponent(geometric(Theorem::T3AlmostSure, 3.0, 1.0)), HypothesisError);
    EXPECT_THROW(rate_exponent(riemannian(Theorem::T2, 3.0, 5.0)), HypothesisError);
    // q above q0 = 4
    EXPECT_THROW(rate_exponent(riemannian(Theorem::T3Mean, 3.0, 4.0, DependenceCoefficient::Eta, 6)),
                 HypothesisError);
}

TEST(Admissibility, BasicHypotheses)
{
    RateParams p = geometric(Theorem::T1, 2.0, 1.0);
    p.rho = 0.0;
    EXPECT_THROW(rate_exponent(p), HypothesisError);
    p = geometric(Theorem::T1, 2.0, 1.0);
    p.d = 0;
    EXPECT_FALSE(check_admissibility(p).admissible);
    p = riemannian(Theorem::T1, 2.0, 0.9);
    EXPECT_FALSE(check_admissibility(p).admissible);
    EXPECT_THROW(rate_exponent(p), HypothesisError);
}

TEST(Admissibility, AuxiliaryItemsReportedNotEnforced)
{
    // q = 4 with a = 5: q0 = 4; the moment-inequality item is reported
    const auto params = riemannian(Theorem::T1, 2.0, 5.0, DependenceCoefficient::Eta, 4);
    const auto report = check_admissibility(params);
    const Hypothesis* aux = find(report, "moment inequality");
    ASSERT_NE(aux, nullptr);
    EXPECT_FALSE(aux->from_theorem);
    // delta = 1/5: max(3, 3 * 0.2 * 6 / (2 + 0), 3) = 3
    EXPECT_NEAR(aux->threshold, 3.0, 1e-12);
    EXPECT_NO_THROW(rate_exponent(params));

    const auto t3 = check_admissibility(riemannian(Theorem::T3Mean, 3.0, 4.0));
    EXPECT_NE(find(t3, "probability inequality"), nullptr);
    EXPECT_NE(t3.to_text().find("(auxiliary)"), std::string::npos);
}

TEST(Theorems, NamesRoundTrip)
{
    for (Theorem t : {Theorem::T1, Theorem::T2, Theorem::T3Mean, Theorem::T3AlmostSure})
        EXPECT_EQ(theorem_from_string(to_string(t)), t);
    EXPECT_THROW(theorem_from_string("T4"), DomainError);
}
