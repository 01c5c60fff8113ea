#include "wdde/errors.hpp"
#include "wdde/harness.hpp"
#include "wdde/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wdde;
namespace fs = std::filesystem;

namespace {

std::vector<std::pair<double, double>> power_law(double c, double slope, std::vector<double> ns)
{
    std::vector<std::pair<double, double>> out;
    for (double n : ns)
        out.emplace_back(n, c * std::pow(n, slope));
    return out;
}

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.process = power_law_linear_process(5.0, 20);
    c.bandwidth = PowerLawBandwidth{1.0, 0.2};
    c.n_grid = {64, 128, 256, 512};
    c.replicates = 40;
    c.seed = 99;
    return c;
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("wdde_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST(Metric, PointwiseLq)
{
    const std::vector<double> e{0.1, 0.3};
    EXPECT_NEAR(metric_pointwise_lq(e, 2.0), std::sqrt(0.05), 1e-15);
    EXPECT_NEAR(metric_pointwise_lq(e, 2.0), 0.223607, 1e-6);
    for (double q : {1.0, 2.0, 3.5, 8.0}) {
        const std::vector<double> c(7, 0.37);
        EXPECT_NEAR(metric_pointwise_lq(c, q), 0.37, 1e-15);
    }
    const std::vector<double> abs_err{1.0, -2.0, 3.0};
    EXPECT_DOUBLE_EQ(metric_pointwise_lq(abs_err, 1.0), 2.0);
    EXPECT_THROW(metric_pointwise_lq(std::vector<double>{}, 2.0), DomainError);
    EXPECT_THROW(metric_pointwise_lq(e, 0.5), DomainError);
}

TEST(Slope, ExactPowerLaw)
{
    const auto pts = power_law(1.0, -0.4, {512, 1024, 2048, 4096, 8192});
    const SlopeFit fit = fit_loglog_slope(pts);
    EXPECT_NEAR(fit.slope, -0.4, 1e-12);
    EXPECT_NEAR(fit.intercept, 0.0, 1e-10);
    EXPECT_NEAR(fit.ci.second - fit.ci.first, 0.0, 1e-9);
}

TEST(Slope, InterceptAndConstant)
{
    const SlopeFit fit = fit_loglog_slope(power_law(3.0, -0.5, {10, 100, 1000, 10000}));
    EXPECT_NEAR(fit.slope, -0.5, 1e-12);
    EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-10);
    const SlopeFit flat = fit_loglog_slope(power_law(2.0, 0.0, {4, 8, 16, 32, 64}));
    EXPECT_NEAR(flat.slope, 0.0, 1e-14);
}

TEST(Slope, AlternatingPerturbation)
{
    std::vector<std::pair<double, double>> pts;
    for (int k = 9; k <= 15; ++k) {
        const double n = std::ldexp(1.0, k);
        pts.emplace_back(n, std::pow(n, -0.4) * (1.0 + 0.01 * (k % 2 == 0 ? 1.0 : -1.0)));
    }
    const SlopeFit fit = fit_loglog_slope(pts);
    EXPECT_LT(std::abs(fit.slope + 0.4), 0.02);
    EXPECT_LT(fit.ci.first, fit.slope);
    EXPECT_GT(fit.ci.second, fit.slope);
}

TEST(Slope, RecoversPlantedExponents)
{
    Rng rng(314);
    for (int i = 0; i < 100; ++i) {
        const double e = 0.1 + 0.8 * rng.uniform();
        const double c = 0.1 + 10.0 * rng.uniform();
        const SlopeFit fit = fit_loglog_slope(power_law(c, -e, {512, 1024, 2048, 4096, 8192, 16384, 32768}));
        EXPECT_LT(std::abs(fit.slope + e), 0.02);
        EXPECT_NEAR(fit.slope, -e, 1e-10);
    }
}

TEST(Slope, Preconditions)
{
    EXPECT_THROW(fit_loglog_slope(power_law(1.0, -0.4, {1024})), DomainError);
    EXPECT_THROW(fit_loglog_slope(power_law(1.0, -0.4, {8, 16, 32})), DomainError);
    auto pts = power_law(1.0, -0.4, {8, 16, 32, 64});
    pts[2].second = 0.0;
    EXPECT_THROW(fit_loglog_slope(pts), DomainError);
    pts[2].second = -1.0;
    EXPECT_THROW(fit_loglog_slope(pts), DomainError);
}

TEST(Config, SingleSizeGridRejected)
{
    ExperimentConfig c = small_config();
    c.n_grid = {1024};
    EXPECT_THROW(validate(c), DomainError);
    EXPECT_THROW(run_experiment(c), DomainError);
    c.n_grid = {64, 32, 128, 256};
    EXPECT_THROW(validate(c), DomainError);
    c.n_grid = {1, 2, 4, 8};
    EXPECT_THROW(validate(c), DomainError);
    c = small_config();
    c.replicates = 0;
    EXPECT_THROW(validate(c), DomainError);
    c = small_config();
    c.metric = Mise{-1.0, 1.0, 100};
    EXPECT_THROW(validate(c), DomainError);
}

TEST(Csv, EmptyResultIsHeaderOnly)
{
    EXPECT_EQ(to_csv(ExperimentResult{}), std::string(csv_header) + "\n");
    EXPECT_EQ(std::string(csv_header), "process,estimator,n,m,replicates,metric,value,stderr,seed");
}

TEST(Csv, RowsAndQuoting)
{
    const ExperimentResult r = run_experiment(small_config());
    const std::string csv = to_csv(r);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, csv_header);
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_NE(line.find(",99"), std::string::npos);
    }
    EXPECT_EQ(rows, 4);
    EXPECT_EQ(r.rows.size(), 4u);

    const fs::path dir = scratch_dir("csv");
    write_csv(r, dir / "out.csv");
    std::ifstream file(dir / "out.csv");
    std::stringstream buf;
    buf << file.rdbuf();
    EXPECT_EQ(buf.str(), csv);
    fs::remove_all(dir);
}

TEST(Config, RoundTrip)
{
    std::vector<ExperimentConfig> configs;
    configs.push_back(ExperimentConfig{});
    configs.push_back(small_config());

    ExperimentConfig sampled;
    sampled.process = sampled_process(doubling_process(), Geometric{2});
    sampled.estimator = KernelFamily::compact(4);
    sampled.bandwidth = FixedBandwidth{6};
    sampled.metric = Mise{0.0, 1.0, 101, GaussianWeight{0.5, 0.25}};
    sampled.pilot = PilotOptions{1000, 32, ""};
    configs.push_back(sampled);

    ExperimentConfig bilinear;
    BilinearParams bp;
    bp.a = 0.5;
    bp.b = 0.1;
    bp.ar = {0.2, 0.1};
    bp.ma = {0.3};
    bp.innovations = Uniform{-1.0, 1.0};
    bp.burn_in = 250;
    bilinear.process = bilinear_process(bp, DependenceBound{DependenceCoefficient::Eta, GeometricDecay{0.3, 1.0}, 2.0});
    bilinear.estimator = KernelFamily::fejer();
    bilinear.metric = SupNorm{2.5, 51};
    bilinear.bandwidth = PowerLawBandwidth{1.5, 0.25};
    bilinear.theory = RateParams{3.0, 1, DependenceBound{DependenceCoefficient::Eta, RiemannianDecay{4.5}, 1.0}, 4,
                                 Theorem::T3AlmostSure};
    bilinear.tolerance = 0.125;
    bilinear.seed = 18446744073709551615ull;
    configs.push_back(bilinear);

    ExperimentConfig linear;
    linear.process = linear_process({{-1, 0.25}, {0, 1.0}, {2, -0.125}}, Bernoulli{0.3});
    linear.estimator = KernelFamily::haar();
    linear.metric = PointwiseLq{0.1, 4.0};
    linear.n_grid = {100, 300, 900, 2700, 8100};
    configs.push_back(linear);

    ExperimentConfig iid;
    iid.process = iid_process(Fixed{{0.5, 0.25, -1.0}});
    iid.theory.decay = DependenceBound{DependenceCoefficient::PhiTilde, GeometricDecay{0.6931471805599453, 1.0}, 1.0};
    configs.push_back(iid);

    for (const auto& c : configs) {
        const std::string text = format_config(c);
        const ExperimentConfig back = parse_config_string(text);
        EXPECT_EQ(back, c) << text;
        EXPECT_EQ(format_config(back), text);
    }

    const fs::path dir = scratch_dir("config");
    write_config(configs[3], dir / "c.conf");
    EXPECT_EQ(read_config(dir / "c.conf"), configs[3]);
    fs::remove_all(dir);
}

TEST(Config, ParsesDocumentedForms)
{
    const ExperimentConfig c = parse_config_string(R"(# T1 slope
[experiment]
seed = 5
replicates = 10
n_grid = pow2:9:12

[process]
kind = linear
coefficients = power:5:50
innovations = gaussian(0, 1)

[estimator]
kernel = epanechnikov

[bandwidth]
rule = power
c = 1
exponent = 0.2

[metric]
type = pointwise
x = 0
q = 2

[theory]
theorem = T1
rho = 2
decay = eta riemannian(4) 1
)");
    EXPECT_EQ(c.seed, 5u);
    EXPECT_EQ(c.n_grid, (std::vector<std::size_t>{512, 1024, 2048, 4096}));
    EXPECT_EQ(c.process, power_law_linear_process(5.0, 50));
    EXPECT_EQ(c.estimator, KernelFamily::compact(2));
    EXPECT_EQ(std::get<PowerLawBandwidth>(c.bandwidth), (PowerLawBandwidth{1.0, 0.2}));
    EXPECT_EQ(c.theory.decay, (DependenceBound{DependenceCoefficient::Eta, RiemannianDecay{4.0}, 1.0}));
}

TEST(Config, ErrorsCarryLineNumbers)
{
    const auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse_config_string(text);
        } catch (const ParseError& e) {
            EXPECT_EQ(std::string(e.what()).rfind("line " + std::to_string(e.line()) + ": ", 0), 0u) << e.what();
            return e.line();
        }
        ADD_FAILURE() << "no ParseError for:\n" << text;
        return 0;
    };
    EXPECT_EQ(line_of("[experiment]\nseed = 3\n\nreplicats = 5\n"), 4u);
    EXPECT_EQ(line_of("[experiment]\nseed = three\n"), 2u);
    EXPECT_EQ(line_of("[experiment]\nseed = 1\n[process]\nkind = linear\ncoefficients = 0:1\nx0 = 0.5\n"), 6u);
    EXPECT_EQ(line_of("[experiment]\n[bogus]\n"), 2u);
    EXPECT_EQ(line_of("seed = 1\n"), 1u);
    EXPECT_EQ(line_of("[experiment]\nseed 1\n"), 2u);
    EXPECT_EQ(line_of("[experiment]\nseed = 1\nseed = 2\n"), 3u);
    // lambda >= 1 is reported at the kind line
    EXPECT_EQ(line_of("[process]\nkind = bilinear\nar = 0.9, 0.5\n"), 2u);
}

TEST(Experiment, WorkersDoNotChangeCsv)
{
    ExperimentConfig c = small_config();
    c.metric = Mise{-2.0, 2.0, 41};
    const std::string one = to_csv(run_experiment(c, 1));
    const std::string eight = to_csv(run_experiment(c, 8));
    EXPECT_EQ(one, eight);
    EXPECT_EQ(one, to_csv(run_experiment(c, 3)));
    c.seed = 100;
    EXPECT_NE(one, to_csv(run_experiment(c, 1)));
}

TEST(Experiment, IidErrorDecreases)
{
    ExperimentConfig c;
    c.process = iid_process(Gaussian{});
    c.bandwidth = PowerLawBandwidth{1.0, 0.2};
    c.n_grid = {64, 128, 256, 512, 1024, 2048};
    c.replicates = 400;
    c.seed = 4;
    const ExperimentResult r = run_experiment(c);
    int inversions = 0;
    for (std::size_t i = 1; i < r.rows.size(); ++i)
        if (r.rows[i].value >= r.rows[i - 1].value)
            ++inversions;
    EXPECT_LE(inversions, 1);
    EXPECT_LT(r.fitted_slope, 0.0);
    EXPECT_NEAR(r.theoretical_slope, -0.4, 1e-12);
    for (const auto& row : r.rows)
        EXPECT_GT(row.std_error, 0.0);
}

TEST(Experiment, MetricsAgreeOnScale)
{
    ExperimentConfig c = small_config();
    c.metric = SupNorm{2.0, 81};
    const ExperimentResult sup = run_experiment(c);
    c.metric = PointwiseLq{0.0, 1.0};
    const ExperimentResult point = run_experiment(c);
    // the sup over a grid containing x = 0 dominates |error(0)| replicate by replicate
    for (std::size_t i = 0; i < sup.rows.size(); ++i)
        EXPECT_GE(sup.rows[i].value, point.rows[i].value);
    c.metric = Mise{-1.0, 1.0, 41};
    EXPECT_NEAR(run_experiment(c).theoretical_slope, -0.8, 1e-12);
}

TEST(Experiment, DegenerateBandwidthWarns)
{
    ExperimentConfig c = small_config();
    c.bandwidth = FixedBandwidth{1};
    const ExperimentResult r = run_experiment(c);
    ASSERT_FALSE(r.warnings.empty());
    EXPECT_NE(r.warnings.front().find("m"), std::string::npos);
    for (const auto& row : r.rows)
        EXPECT_EQ(row.m, 1);
}

TEST(Experiment, PilotOracleIsFlagged)
{
    const fs::path dir = scratch_dir("pilot");
    BilinearParams bp;
    bp.a = 0.5;
    bp.ar = {0.3};
    bp.ma = {0.2};
    ExperimentConfig c = small_config();
    c.process = bilinear_process(bp, DependenceBound{DependenceCoefficient::Eta, GeometricDecay{0.5, 1.0}, 1.0});
    ASSERT_FALSE(c.process.true_density.has_value());
    c.pilot = PilotOptions{20000, 16, dir.string()};
    const ExperimentResult r = run_experiment(c);
    EXPECT_TRUE(r.pilot_oracle);
    EXPECT_NE(r.process.find("oracle=pilot"), std::string::npos);
    EXPECT_FALSE(r.warnings.empty());
    const std::string csv = to_csv(r);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line))
        EXPECT_NE(line.find("oracle=pilot"), std::string::npos);
    EXPECT_FALSE(fs::is_empty(dir));
    // second run reads the cache and agrees exactly
    EXPECT_EQ(to_csv(run_experiment(c)), csv);

    c.pilot.samples = 0;
    EXPECT_THROW(run_experiment(c), DomainError);
    fs::remove_all(dir);
}

TEST(Pilot, ApproximatesKnownDensity)
{
    const PilotDensity p = pilot_density(iid_process(Uniform{0.0, 1.0}), PilotOptions{200000, 16, ""}, 3);
    for (double x : {0.3, 0.5, 0.7})
        EXPECT_NEAR(p(x), 1.0, 0.1) << x;
    EXPECT_NEAR(p(-0.04), 0.0, 0.35);
}

TEST(PathCsv, Format)
{
    const Path path = simulate(doubling_process(0.5), 3, 1);
    std::ostringstream out;
    write_path_csv(path, out);
    const std::string s = out.str();
    EXPECT_EQ(s.rfind("t,value\n1,", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
}

TEST(Summary, MentionsVerdict)
{
    const ExperimentResult r = run_experiment(small_config());
    const std::string s = format_summary(r);
    EXPECT_NE(s.find("fitted slope"), std::string::npos);
    EXPECT_NE(s.find(r.pass ? "PASS" : "FAIL"), std::string::npos);
}
