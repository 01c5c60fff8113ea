#pragma once

#include "wdde/estimators.hpp"
#include "wdde/processes.hpp"
#include "wdde/rates.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wdde {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// m_n from the theory parameters of the experiment.
struct TheoremBandwidth
{
    bool operator==(const TheoremBandwidth&) const = default;
};

struct FixedBandwidth
{
    int m = 1;
    bool operator==(const FixedBandwidth&) const = default;
};

// m_n = max(1, round(c * n^exponent))
struct PowerLawBandwidth
{
    double c = 1.0;
    double exponent = 0.2;
    bool operator==(const PowerLawBandwidth&) const = default;
};

using BandwidthChoice = std::variant<TheoremBandwidth, FixedBandwidth, PowerLawBandwidth>;

// (mean |f_n(x) - f(x)|^q)^(1/q)
struct PointwiseLq
{
    double x = 0.0;
    double q = 2.0;
    bool operator==(const PointwiseLq&) const = default;
};

struct IndicatorWeight
{
    bool operator==(const IndicatorWeight&) const = default;
};

struct GaussianWeight
{
    double mean = 0.0;
    double sd = 1.0;
    bool operator==(const GaussianWeight&) const = default;
};

using MiseWeight = std::variant<IndicatorWeight, GaussianWeight>;

// mean over replicates of the integral of (f_n - f)^2 p over [lo, hi]
struct Mise
{
    double lo = -3.0;
    double hi = 3.0;
    int points = 201; // odd, Simpson nodes
    MiseWeight weight = IndicatorWeight{};
    bool operator==(const Mise&) const = default;
};

// mean over replicates of max |f_n - f| on an equispaced grid of [-M, M]
struct SupNorm
{
    double M = 3.0;
    int points = 201;
    bool operator==(const SupNorm&) const = default;
};

using Metric = std::variant<PointwiseLq, Mise, SupNorm>;

std::string describe(const Metric& metric);
std::string describe(const BandwidthChoice& rule);

/// Substitute density for processes without a known marginal: a Fejér
/// estimate from one long path, cached on disk.
struct PilotOptions
{
    std::size_t samples = 10'000'000; // 0 disables the pilot
    int m = 128;
    std::string cache_dir = ".wdde_cache"; // empty disables caching

    bool operator==(const PilotOptions&) const = default;
};

struct ExperimentConfig
{
    ProcessSpec process = iid_process(Gaussian{});
    KernelFamily estimator = KernelFamily::compact(2);
    BandwidthChoice bandwidth = TheoremBandwidth{};
    std::vector<std::size_t> n_grid{512, 1024, 2048, 4096, 8192, 16384, 32768};
    std::size_t replicates = 500;
    Metric metric = PointwiseLq{};
    std::uint64_t seed = 1;
    RateParams theory;       // theoretical exponent and the Theorem bandwidth rule
    double tolerance = 0.1;  // allowed |fitted slope - theoretical slope|
    PilotOptions pilot;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Throws DomainError unless n_grid is strictly increasing with at least 4
/// entries, all >= 2, replicates >= 1 and the metric is well formed.
void validate(const ExperimentConfig& config);

/// Bandwidth index used at sample size n.
int bandwidth_at(const ExperimentConfig& config, std::size_t n);

// ---------------------------------------------------------------------------
// Metrics and slope fitting
// ---------------------------------------------------------------------------

/// (mean |e|^q)^(1/q), q >= 1.
double metric_pointwise_lq(std::span<const double> errors, double q);

struct SlopeFit
{
    double slope = 0.0;
    double intercept = 0.0;
    std::pair<double, double> ci; // slope +- 1.96 standard errors
};

/// OLS of ln(value) on ln(n). Needs at least 4 points, all values > 0.
SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentRow
{
    std::size_t n = 0;
    int m = 0;
    double value = 0.0;
    double std_error = 0.0;
};

struct ExperimentResult
{
    std::string process;   // process id, ";oracle=pilot" when the density was estimated
    std::string estimator; // kernel name
    std::string metric;    // metric description
    std::string bandwidth; // bandwidth rule description
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::vector<ExperimentRow> rows;
    double fitted_slope = 0.0;
    double intercept = 0.0;
    std::pair<double, double> slope_ci{0.0, 0.0};
    double theoretical_slope = 0.0; // -rate for errors, -2 rate for MISE
    double tolerance = 0.1;
    bool pass = false;
    bool pilot_oracle = false;
    std::vector<std::string> warnings;
};

/// Simulates `replicates` paths per n, estimates, evaluates the metric and
/// fits the log-log slope. Replicate (i, r) uses seed derive_seed(seed, i, r)
/// and results are reduced in index order, so `workers` never changes the
/// output.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers = 1);

/// Plain-text summary: rows, fitted slope, CI, theoretical slope, verdict.
std::string format_summary(const ExperimentResult& result);

inline constexpr const char* csv_header = "process,estimator,n,m,replicates,metric,value,stderr,seed";

void write_csv(const ExperimentResult& result, std::ostream& out);
void write_csv(const ExperimentResult& result, const std::filesystem::path& path);
std::string to_csv(const ExperimentResult& result);

/// (ln n, ln value) points with the fitted line.
void write_svg(const ExperimentResult& result, const std::filesystem::path& path);

/// Two-column CSV `t,value` with 1-based t.
void write_path_csv(const Path& path, std::ostream& out);
void write_path_csv(const Path& path, const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Density oracle
// ---------------------------------------------------------------------------

struct PilotDensity
{
    FejerSeries series;
    double lo = 0.0; // maps to -pi
    double hi = 1.0; // maps to pi

    double operator()(double x) const;
};

/// Fejér estimate from `options.samples` values of one path, mapped affinely
/// from a padded sample range onto [-pi, pi]. Loaded from the cache when present.
PilotDensity pilot_density(const ProcessSpec& spec, const PilotOptions& options, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

/// Parses the line-oriented config format (see README). Throws ParseError
/// with the offending line number.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig read_config(const std::filesystem::path& path);

/// Writes a config that parse_config reads back equal.
std::string format_config(const ExperimentConfig& config);
void write_config(const ExperimentConfig& config, const std::filesystem::path& path);

/// The [process] section body for a spec, also used as the pilot cache key.
std::string format_process(const ProcessSpec& spec);

/// Textual forms shared by the config format and the CLI.
InnovationSpec parse_innovations(const std::string& text);
std::string format_innovations(const InnovationSpec& spec);
DependenceBound parse_dependence(const std::string& text);
std::string format_dependence(const DependenceBound& bound);
KernelFamily parse_kernel(const std::string& name);

} // namespace wdde
