#include "wdde/harness.hpp"

#include "wdde/errors.hpp"
#include "wdde/parallel.hpp"
#include "wdde/rng.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace wdde {

namespace {

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::uint64_t pilot_stream = 0x70696c6f74ULL;

// Kernel estimate on many points of one sample. Compact and Haar kernels
// visit only the sorted values inside the support; Fejér uses the
// coefficient form.
class GridEstimator
{
public:
    GridEstimator(std::span<const double> data, const KernelFamily& kernel, int m)
        : kernel_(kernel)
        , m_(m)
        , n_(static_cast<double>(data.size()))
    {
        if (kernel.kind == KernelKind::FejerProjection)
            series_.emplace(data, m);
        else {
            sorted_.assign(data.begin(), data.end());
            std::sort(sorted_.begin(), sorted_.end());
        }
    }

    double operator()(double x) const
    {
        if (series_)
            return (*series_)(x);
        const auto [lo, hi] = kernel_.support(m_, x);
        auto first = std::lower_bound(sorted_.begin(), sorted_.end(), lo);
        const auto last = std::upper_bound(first, sorted_.end(), hi);
        double sum = 0.0;
        for (; first != last; ++first)
            sum += kernel_(m_, x, *first);
        return sum / n_;
    }

private:
    const KernelFamily& kernel_;
    int m_;
    double n_;
    std::vector<double> sorted_;
    std::optional<FejerSeries> series_;
};

double gaussian_pdf(double x, double mean, double sd)
{
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

// Simpson weights on `points` equispaced nodes (points odd, >= 3).
std::vector<double> simpson_weights(int points, double step)
{
    std::vector<double> w(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        w[i] = (i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    for (double& v : w)
        v *= step / 3.0;
    return w;
}

struct MeanAndError
{
    double mean = 0.0;
    double std_error = 0.0;
};

MeanAndError mean_and_error(std::span<const double> v)
{
    const double count = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v)
        sum += x;
    const double mean = sum / count;
    if (v.size() < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (count - 1.0) / count)};
}

std::optional<PilotDensity> load_pilot(const std::filesystem::path& file, const std::string& key)
{
    std::ifstream in(file);
    if (!in)
        return std::nullopt;
    std::string line;
    std::string stored_key;
    while (std::getline(in, line) && line != "---")
        stored_key += line + '\n';
    if (stored_key != key)
        return std::nullopt;
    int m = 0;
    double lo = 0.0;
    double hi = 0.0;
    if (!(in >> m >> lo >> hi) || m < 1)
        return std::nullopt;
    std::vector<double> c(static_cast<std::size_t>(m - 1));
    std::vector<double> s(c.size());
    for (std::size_t k = 0; k < c.size(); ++k)
        if (!(in >> c[k] >> s[k]))
            return std::nullopt;
    return PilotDensity{FejerSeries(m, std::move(c), std::move(s)), lo, hi};
}

void store_pilot(const std::filesystem::path& file, const std::string& key, const PilotDensity& pilot)
{
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
    if (ec)
        return;
    const auto tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            return;
        out << key << "---\n" << fmt::format("{} {} {}\n", pilot.series.m(), pilot.lo, pilot.hi);
        for (std::size_t k = 0; k < pilot.series.cos_coeffs().size(); ++k)
            out << fmt::format("{} {}\n", pilot.series.cos_coeffs()[k], pilot.series.sin_coeffs()[k]);
        if (!out)
            return;
    }
    std::filesystem::rename(tmp, file, ec);
}

} // namespace

// ---------------------------------------------------------------------------

std::string describe(const Metric& metric)
{
    return std::visit(overloaded{
                          [](const PointwiseLq& p) { return fmt::format("L{}(x={})", p.q, p.x); },
                          [](const Mise& p) {
                              const std::string weight = std::visit(
                                  overloaded{
                                      [](const IndicatorWeight&) { return std::string("indicator"); },
                                      [](const GaussianWeight& g) {
                                          return fmt::format("gaussian({};{})", g.mean, g.sd);
                                      },
                                  },
                                  p.weight);
                              return fmt::format("mise(lo={};hi={};points={};weight={})", p.lo, p.hi, p.points,
                                                 weight);
                          },
                          [](const SupNorm& p) { return fmt::format("sup(M={};points={})", p.M, p.points); },
                      },
                      metric);
}

std::string describe(const BandwidthChoice& rule)
{
    return std::visit(overloaded{
                          [](const TheoremBandwidth&) { return std::string("theorem"); },
                          [](const FixedBandwidth& f) { return fmt::format("fixed({})", f.m); },
                          [](const PowerLawBandwidth& p) { return fmt::format("{}*n^{}", p.c, p.exponent); },
                      },
                      rule);
}

void validate(const ExperimentConfig& config)
{
    if (config.n_grid.size() < 4)
        throw DomainError(fmt::format("n_grid needs at least 4 sample sizes for slope fitting (got {})",
                                      config.n_grid.size()));
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
        if (config.n_grid[i] < 2)
            throw DomainError("every sample size in n_grid must be at least 2");
        if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1])
            throw DomainError("n_grid must be strictly increasing");
    }
    if (config.replicates < 1)
        throw DomainError("replicates must be at least 1");
    if (!(config.tolerance >= 0.0))
        throw DomainError("tolerance must be nonnegative");
    std::visit(overloaded{
                   [](const PointwiseLq& p) {
                       if (!(p.q >= 1.0))
                           throw DomainError("pointwise metric needs q >= 1");
                   },
                   [](const Mise& p) {
                       if (!(p.hi > p.lo))
                           throw DomainError("MISE interval needs hi > lo");
                       if (p.points < 3 || p.points % 2 == 0)
                           throw DomainError("MISE grid needs an odd number of points, at least 3");
                       if (const auto* g = std::get_if<GaussianWeight>(&p.weight); g && !(g->sd > 0.0))
                           throw DomainError("Gaussian MISE weight needs sd > 0");
                   },
                   [](const SupNorm& p) {
                       if (!(p.M > 0.0))
                           throw DomainError("sup-norm metric needs M > 0");
                       if (p.points < 2)
                           throw DomainError("sup-norm grid needs at least 2 points");
                   },
               },
               config.metric);
    std::visit(overloaded{
                   [](const TheoremBandwidth&) {},
                   [](const FixedBandwidth& f) {
                       if (f.m < 1)
                           throw DomainError("fixed bandwidth index must be at least 1");
                   },
                   [](const PowerLawBandwidth& p) {
                       if (!(p.c > 0.0))
                           throw DomainError("power-law bandwidth needs c > 0");
                   },
               },
               config.bandwidth);
}

int bandwidth_at(const ExperimentConfig& config, std::size_t n)
{
    return std::visit(overloaded{
                          [&](const TheoremBandwidth&) { return optimal_bandwidth(config.theory, n); },
                          [](const FixedBandwidth& f) { return f.m; },
                          [&](const PowerLawBandwidth& p) {
                              const double raw = p.c * std::pow(static_cast<double>(n), p.exponent);
                              return std::max(1, static_cast<int>(std::lround(raw)));
                          },
                      },
                      config.bandwidth);
}

// ---------------------------------------------------------------------------

double metric_pointwise_lq(std::span<const double> errors, double q)
{
    if (errors.empty())
        throw DomainError("metric_pointwise_lq: empty error sequence");
    if (!(q >= 1.0))
        throw DomainError("metric_pointwise_lq: q must be at least 1");
    double sum = 0.0;
    for (double e : errors)
        sum += std::pow(std::abs(e), q);
    return std::pow(sum / static_cast<double>(errors.size()), 1.0 / q);
}

SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points)
{
    if (points.size() < 4)
        throw DomainError(fmt::format("slope fit needs at least 4 points (got {})", points.size()));
    const double k = static_cast<double>(points.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [n, v] : points) {
        if (!(n > 0.0))
            throw DomainError("slope fit: sample sizes must be positive");
        if (!(v > 0.0))
            throw DomainError(fmt::format("slope fit: nonpositive value {} at n = {}", v, n));
        mx += std::log(n);
        my += std::log(v);
    }
    mx /= k;
    my /= k;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [n, v] : points) {
        const double dx = std::log(n) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(v) - my);
    }
    if (!(sxx > 0.0))
        throw DomainError("slope fit: sample sizes must not all be equal");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (const auto& [n, v] : points) {
        const double r = std::log(v) - (fit.intercept + fit.slope * std::log(n));
        rss += r * r;
    }
    const double se = std::sqrt(rss / (k - 2.0) / sxx);
    fit.ci = {fit.slope - 1.96 * se, fit.slope + 1.96 * se};
    return fit;
}

// ---------------------------------------------------------------------------

double PilotDensity::operator()(double x) const
{
    if (x < lo || x > hi)
        return 0.0;
    const double scale = 2.0 * std::numbers::pi / (hi - lo);
    return series(-std::numbers::pi + (x - lo) * scale) * scale;
}

PilotDensity pilot_density(const ProcessSpec& spec, const PilotOptions& options, std::uint64_t seed)
{
    if (options.samples < 2)
        throw DomainError("pilot density needs at least 2 samples");
    const std::string key = format_process(spec) +
                            fmt::format("pilot_samples = {}\npilot_m = {}\nseed = {}\n", options.samples, options.m, seed);
    std::filesystem::path file;
    if (!options.cache_dir.empty()) {
        file = std::filesystem::path(options.cache_dir) / fmt::format("pilot-{:016x}.txt", fnv1a(key));
        if (auto cached = load_pilot(file, key))
            return std::move(*cached);
    }

    std::vector<double> values;
    {
        const Path path = simulate(spec, options.samples, derive_seed(seed, pilot_stream));
        values.assign(path.values().begin(), path.values().end());
    }
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    double lo = *min_it;
    double hi = *max_it;
    const double pad = hi > lo ? 0.05 * (hi - lo) : 1.0;
    lo -= pad;
    hi += pad;
    const double scale = 2.0 * std::numbers::pi / (hi - lo);
    for (double& v : values)
        v = -std::numbers::pi + (v - lo) * scale;
    PilotDensity pilot{FejerSeries(values, options.m), lo, hi};
    if (!file.empty())
        store_pilot(file, key, pilot);
    return pilot;
}

// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers)
{
    validate(config);

    ExperimentResult result;
    result.process = config.process.id();
    result.estimator = config.estimator.name();
    result.metric = describe(config.metric);
    result.bandwidth = describe(config.bandwidth);
    result.replicates = config.replicates;
    result.seed = config.seed;
    result.tolerance = config.tolerance;

    const RateResult rate = rate_exponent(config.theory);
    result.theoretical_slope =
        -(std::holds_alternative<Mise>(config.metric) ? 2.0 : 1.0) * rate.exponent;

    std::function<double(double)> truth;
    if (config.process.true_density) {
        truth = config.process.true_density->pdf;
    } else {
        if (config.pilot.samples == 0)
            throw DomainError(fmt::format("process '{}' has no known density and the pilot oracle is disabled",
                                          result.process));
        auto pilot = std::make_shared<PilotDensity>(pilot_density(config.process, config.pilot, config.seed));
        truth = [pilot](double x) { return (*pilot)(x); };
        result.pilot_oracle = true;
        result.process += ";oracle=pilot";
        result.warnings.push_back(fmt::format("no known density: errors are measured against a pilot Fejér "
                                              "estimate ({} samples, m = {})",
                                              config.pilot.samples, config.pilot.m));
    }

    // Evaluation grid, truth and quadrature weights for the grid metrics.
    std::vector<double> grid;
    std::vector<double> f_grid;
    std::vector<double> w_grid;
    if (const auto* mise = std::get_if<Mise>(&config.metric)) {
        const double step = (mise->hi - mise->lo) / (mise->points - 1);
        w_grid = simpson_weights(mise->points, step);
        for (int i = 0; i < mise->points; ++i) {
            const double x = mise->lo + i * step;
            grid.push_back(x);
            if (const auto* g = std::get_if<GaussianWeight>(&mise->weight))
                w_grid[i] *= gaussian_pdf(x, g->mean, g->sd);
        }
    } else if (const auto* sup = std::get_if<SupNorm>(&config.metric)) {
        for (int i = 0; i < sup->points; ++i)
            grid.push_back(-sup->M + 2.0 * sup->M * i / (sup->points - 1));
    }
    for (double x : grid)
        f_grid.push_back(truth(x));
    const double f_point = [&] {
        const auto* p = std::get_if<PointwiseLq>(&config.metric);
        return p ? truth(p->x) : 0.0;
    }();

    const std::size_t sizes = config.n_grid.size();
    const std::size_t reps = config.replicates;
    std::vector<int> bandwidths(sizes);
    for (std::size_t i = 0; i < sizes; ++i) {
        bandwidths[i] = bandwidth_at(config, config.n_grid[i]);
        if (bandwidths[i] < 2)
            result.warnings.push_back(fmt::format("degenerate bandwidth m = {} at n = {}", bandwidths[i],
                                                  config.n_grid[i]));
    }

    // One slot per (size, replicate): |error|^q, ISE or sup error.
    std::vector<double> slots(sizes * reps);
    parallel_for(slots.size(), workers, [&](std::size_t index) {
        const std::size_t i = index / reps;
        const std::size_t r = index % reps;
        const int m = bandwidths[i];
        const Path path = simulate(config.process, config.n_grid[i], derive_seed(config.seed, i, r));
        slots[index] = std::visit(overloaded{
                                      [&](const PointwiseLq& p) {
                                          const double e = estimate_at(path, config.estimator, m, p.x).value - f_point;
                                          return std::pow(std::abs(e), p.q);
                                      },
                                      [&](const Mise&) {
                                          const GridEstimator est(path.values(), config.estimator, m);
                                          double ise = 0.0;
                                          for (std::size_t j = 0; j < grid.size(); ++j) {
                                              const double e = est(grid[j]) - f_grid[j];
                                              ise += w_grid[j] * e * e;
                                          }
                                          return ise;
                                      },
                                      [&](const SupNorm&) {
                                          const GridEstimator est(path.values(), config.estimator, m);
                                          double worst = 0.0;
                                          for (std::size_t j = 0; j < grid.size(); ++j)
                                              worst = std::max(worst, std::abs(est(grid[j]) - f_grid[j]));
                                          return worst;
                                      },
                                  },
                                  config.metric);
    });

    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < sizes; ++i) {
        const std::span<const double> block(slots.data() + i * reps, reps);
        const MeanAndError me = mean_and_error(block);
        ExperimentRow row{config.n_grid[i], bandwidths[i], me.mean, me.std_error};
        if (const auto* p = std::get_if<PointwiseLq>(&config.metric)) {
            // delta method for A^(1/q)
            row.value = std::pow(me.mean, 1.0 / p->q);
            row.std_error = me.mean > 0.0 ? row.value / (p->q * me.mean) * me.std_error : 0.0;
        }
        result.rows.push_back(row);
        points.emplace_back(static_cast<double>(row.n), row.value);
    }

    const SlopeFit fit = fit_loglog_slope(points);
    result.fitted_slope = fit.slope;
    result.intercept = fit.intercept;
    result.slope_ci = fit.ci;
    result.pass = std::abs(fit.slope - result.theoretical_slope) <= config.tolerance;
    return result;
}

std::string format_summary(const ExperimentResult& result)
{
    std::string out;
    out += fmt::format("process    {}\nestimator  {}\nbandwidth  {}\nmetric     {}\nreplicates {}\nseed       {}\n",
                       result.process, result.estimator, result.bandwidth, result.metric, result.replicates,
                       result.seed);
    out += fmt::format("\n{:>10} {:>6} {:>14} {:>12}\n", "n", "m", "value", "stderr");
    for (const auto& row : result.rows)
        out += fmt::format("{:>10} {:>6} {:>14.6e} {:>12.3e}\n", row.n, row.m, row.value, row.std_error);
    out += fmt::format("\nfitted slope       {:.4f}  95% CI [{:.4f}, {:.4f}]\n", result.fitted_slope,
                       result.slope_ci.first, result.slope_ci.second);
    out += fmt::format("theoretical slope  {:.4f}  tolerance {}\n", result.theoretical_slope, result.tolerance);
    out += fmt::format("verdict            {}\n", result.pass ? "PASS" : "FAIL");
    for (const auto& w : result.warnings)
        out += fmt::format("warning: {}\n", w);
    return out;
}

void write_csv(const ExperimentResult& result, std::ostream& out)
{
    out << csv_header << '\n';
    for (const auto& row : result.rows)
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_field(result.process), csv_field(result.estimator),
                           row.n, row.m, result.replicates, csv_field(result.metric), row.value, row.std_error,
                           result.seed);
}

std::string to_csv(const ExperimentResult& result)
{
    std::ostringstream out;
    write_csv(result, out);
    return out.str();
}

void write_csv(const ExperimentResult& result, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
    write_csv(result, out);
    if (!out)
        throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

void write_svg(const ExperimentResult& result, const std::filesystem::path& path)
{
    if (result.rows.empty())
        throw DomainError("write_svg: no rows to plot");
    constexpr double width = 480.0;
    constexpr double height = 360.0;
    constexpr double margin = 50.0;
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : result.rows)
        if (row.value > 0.0)
            pts.emplace_back(std::log(static_cast<double>(row.n)), std::log(row.value));
    if (pts.empty())
        throw DomainError("write_svg: no positive values to plot");
    auto [x_lo, x_hi] = std::minmax_element(pts.begin(), pts.end(), [](auto a, auto b) { return a.first < b.first; });
    auto [y_lo, y_hi] =
        std::minmax_element(pts.begin(), pts.end(), [](auto a, auto b) { return a.second < b.second; });
    const double x0 = x_lo->first;
    const double x1 = x_hi->first > x0 ? x_hi->first : x0 + 1.0;
    const double y0 = y_lo->second - 0.1;
    const double y1 = y_hi->second > y_lo->second ? y_hi->second + 0.1 : y0 + 1.0;
    const auto sx = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
    const auto sy = [&](double y) { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); };

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
    out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n", width, height);
    out << fmt::format("<rect x=\"{0}\" y=\"{0}\" width=\"{1}\" height=\"{2}\" fill=\"none\" stroke=\"black\"/>\n",
                       margin, width - 2 * margin, height - 2 * margin);
    out << fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"gray\"/>\n", sx(x0),
                       sy(result.intercept + result.fitted_slope * x0), sx(x1),
                       sy(result.intercept + result.fitted_slope * x1));
    for (const auto& [x, y] : pts)
        out << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\"/>\n", sx(x), sy(y));
    out << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">ln n</text>\n", width / 2, height - 15);
    out << fmt::format("<text x=\"10\" y=\"{}\" font-size=\"12\">ln error</text>\n", margin - 15);
    out << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">slope {:.3f} (theory {:.3f})</text>\n", margin + 10,
                       margin + 20, result.fitted_slope, result.theoretical_slope);
    out << "</svg>\n";
}

void write_path_csv(const Path& path, std::ostream& out)
{
    out << "t,value\n";
    for (std::size_t t = 0; t < path.size(); ++t)
        out << fmt::format("{},{}\n", t + 1, path[t]);
}

void write_path_csv(const Path& path, const std::filesystem::path& file)
{
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error(fmt::format("cannot open '{}' for writing", file.string()));
    write_path_csv(path, out);
}

} // namespace wdde
