// wdde: simulate weakly dependent series, estimate their marginal density and
// run convergence-rate experiments.

#include "wdde/dependence.hpp"
#include "wdde/errors.hpp"
#include "wdde/estimators.hpp"
#include "wdde/harness.hpp"
#include "wdde/processes.hpp"
#include "wdde/rates.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct GlobalOptions
{
    std::uint64_t seed = 1;
    bool seed_given = false;
    unsigned workers = 1;
    std::string out;
};

struct ProcessOptions
{
    std::string config;
    std::vector<std::string> params;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--config", config, "take the [process] section of this config file");
        cmd->add_option("-p,--param", params, "process key=value, as in the [process] section (repeatable)");
    }

    wdde::ProcessSpec build() const
    {
        std::string text;
        if (!config.empty()) {
            if (!params.empty())
                throw CLI::ValidationError("--param", "cannot be combined with --config");
            return wdde::read_config(config).process;
        }
        text = "[process]\n";
        for (const auto& p : params)
            text += p + '\n';
        return wdde::parse_config_string(text).process;
    }
};

// Writes to --out when given, else to stdout.
class Output
{
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_)
                throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
        }
    }

    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
    bool to_stdout() const { return !file_.is_open(); }

private:
    std::ofstream file_;
};

std::vector<double> read_values(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error(fmt::format("cannot open '{}'", path));
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "t,value")
            continue;
        // last comma-separated field
        const auto comma = line.rfind(',');
        const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
        try {
            std::size_t used = 0;
            values.push_back(std::stod(field, &used));
        } catch (const std::exception&) {
            throw wdde::ParseError(line_no, fmt::format("'{}' is not a number", field));
        }
    }
    if (values.empty())
        throw std::runtime_error(fmt::format("'{}' contains no values", path));
    return values;
}

void run_simulate(const GlobalOptions& g, const ProcessOptions& p, std::size_t n)
{
    const wdde::ProcessSpec spec = p.build();
    const wdde::Path path = wdde::simulate(spec, n, g.seed);
    Output out(g.out);
    wdde::write_path_csv(path, out.stream());
}

struct EstimateOptions
{
    std::string input;
    std::size_t n = 1000;
    std::string kernel = "epanechnikov";
    std::optional<int> m;
    std::optional<double> bandwidth;
    std::vector<double> points;
    std::string grid;
};

void run_estimate(const GlobalOptions& g, const ProcessOptions& p, const EstimateOptions& o)
{
    if (o.m.has_value() == o.bandwidth.has_value())
        throw CLI::ValidationError("estimate", "give exactly one of --m and --bandwidth");
    int m = 0;
    if (o.m) {
        m = *o.m;
    } else {
        if (!(*o.bandwidth > 0.0))
            throw CLI::ValidationError("--bandwidth", "must be positive");
        m = std::max(1, static_cast<int>(std::lround(1.0 / *o.bandwidth)));
    }
    const wdde::KernelFamily kernel = wdde::parse_kernel(o.kernel);

    std::vector<double> xs = o.points;
    if (!o.grid.empty()) {
        double lo = 0.0;
        double hi = 0.0;
        int count = 0;
        char c1 = 0;
        char c2 = 0;
        std::istringstream in(o.grid);
        if (!(in >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 2)
            throw CLI::ValidationError("--grid", "expected lo:hi:count with count >= 2");
        for (int i = 0; i < count; ++i)
            xs.push_back(lo + (hi - lo) * i / (count - 1));
    }
    if (xs.empty())
        xs.push_back(0.0);

    const wdde::Path path = o.input.empty() ? wdde::simulate(p.build(), o.n, g.seed)
                                            : wdde::Path(read_values(o.input), 0, o.input);
    Output out(g.out);
    out.stream() << "x,estimate,n,m,kernel\n";
    for (const auto& r : wdde::estimate_grid(path, kernel, m, xs))
        out.stream() << fmt::format("{},{},{},{},{}\n", r.x, r.value, r.n, r.m, kernel.name());
}

struct RatesOptions
{
    std::string theorem = "T1";
    double rho = 2.0;
    int d = 1;
    int q = 2;
    std::string decay = "eta geometric(1, 1) 1";
    std::vector<std::size_t> n;
};

int run_rates(const GlobalOptions& g, const RatesOptions& o)
{
    wdde::RateParams params;
    params.theorem = wdde::theorem_from_string(o.theorem);
    params.rho = o.rho;
    params.d = o.d;
    params.q = o.q;
    params.decay = wdde::parse_dependence(o.decay);

    Output out(g.out);
    std::ostream& os = out.stream();
    const wdde::AdmissibilityReport report = wdde::check_admissibility(params);
    os << report.to_text();
    try {
        const wdde::RateResult rate = wdde::rate_exponent(params);
        os << fmt::format("rate exponent      {}\nlog power          {}\n", rate.exponent, rate.log_power);
        os << fmt::format("bandwidth          m_n = (n^{} / ln(n)^{})^{}\n", rate.bandwidth.num_power,
                          rate.bandwidth.log_power, rate.bandwidth.exponent);
        for (std::size_t n : o.n)
            os << fmt::format("m*_{} = {}\n", n, wdde::optimal_bandwidth(params, n));
    } catch (const wdde::HypothesisError& e) {
        os << fmt::format("no rate: {}\n", e.what());
        return 2;
    }
    return report.admissible ? 0 : 2;
}

struct MomentOptions
{
    std::string kernel = "epanechnikov";
    int m = 2;
    int q = 2;
    std::size_t n = 16;
    std::size_t replicates = 5000;
    double x = 0.0;
    double slack = 0.25;
};

int run_verify_moment(const GlobalOptions& g, const ProcessOptions& p, const MomentOptions& o)
{
    const wdde::ProcessSpec spec = p.build();
    const wdde::MomentCheckReport r =
        wdde::verify_moment_inequality(spec, o.x, wdde::parse_kernel(o.kernel), o.m, o.q, o.n, o.replicates, g.seed,
                                       o.slack, g.workers);
    Output out(g.out);
    std::ostream& os = out.stream();
    os << fmt::format("process {}  x = {}  kernel {}  m = {}\n", spec.id(), o.x, o.kernel, o.m);
    os << fmt::format("q = {}  n = {}  replicates = {}  seed = {}\n", r.q, r.n, r.replicates, g.seed);
    for (const auto& [k, v] : r.v_hat)
        os << fmt::format("V_{{{},n}} = {}\n", k, v);
    os << fmt::format("E|sum Z|^q = {} (s.e. {})\n", r.lhs, r.lhs_stderr);
    os << fmt::format("bound      = {}\nslack      = {}\n", r.rhs, r.slack);
    os << fmt::format("verdict    {}\n", r.holds ? "holds" : "VIOLATED");
    if (!r.note.empty())
        os << fmt::format("note: {}\n", r.note);
    return r.holds ? 0 : 1;
}

int run_experiment_cmd(const GlobalOptions& g, const std::string& config_path, const std::string& svg)
{
    wdde::ExperimentConfig config = wdde::read_config(config_path);
    if (g.seed_given)
        config.seed = g.seed;
    const wdde::ExperimentResult result = wdde::run_experiment(config, g.workers);
    Output out(g.out);
    wdde::write_csv(result, out.stream());
    (out.to_stdout() ? std::cerr : std::cout) << wdde::format_summary(result);
    if (!svg.empty())
        wdde::write_svg(result, svg);
    return result.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Density estimation for weakly dependent series"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option_function<std::uint64_t>(
           "--seed",
           [&](std::uint64_t s) {
               g.seed = s;
               g.seed_given = true;
           },
           "root seed (default 1)")
        ->option_text("<u64>");
    app.add_option("--workers", g.workers, "worker threads; results do not depend on it")->check(CLI::Range(1U, 1024U));
    app.add_option("--out", g.out, "output file (default stdout)");

    ProcessOptions sim_process;
    std::size_t sim_n = 1000;
    auto* simulate = app.add_subcommand("simulate", "simulate a path and write it as CSV");
    sim_process.attach(simulate);
    simulate->add_option("-n", sim_n, "path length")->check(CLI::PositiveNumber);

    ProcessOptions est_process;
    EstimateOptions est;
    auto* estimate = app.add_subcommand("estimate", "density estimates at points");
    est_process.attach(estimate);
    estimate->add_option("--input", est.input, "read values from a CSV (last column) instead of simulating");
    estimate->add_option("-n", est.n, "simulated path length")->check(CLI::PositiveNumber);
    estimate->add_option("--kernel", est.kernel, "epanechnikov, compact4, fejer or haar");
    estimate->add_option("--m", est.m, "bandwidth index");
    estimate->add_option("--bandwidth", est.bandwidth, "bandwidth h; uses m = round(1/h)");
    estimate->add_option("--x", est.points, "evaluation points");
    estimate->add_option("--grid", est.grid, "evaluation grid lo:hi:count");

    RatesOptions rates_opts;
    auto* rates = app.add_subcommand("rates", "rate exponent, bandwidth rule and admissibility report");
    rates->add_option("--theorem", rates_opts.theorem, "T1, T2, T3mean or T3as");
    rates->add_option("--rho", rates_opts.rho, "regularity of f");
    rates->add_option("--d", rates_opts.d, "dimension");
    rates->add_option("--q", rates_opts.q, "moment order");
    rates->add_option("--decay", rates_opts.decay, "dependence bound, e.g. \"eta riemannian(5) 1\"");
    rates->add_option("--n", rates_opts.n, "sample sizes for m*_n");

    ProcessOptions mom_process;
    MomentOptions mom;
    auto* verify = app.add_subcommand("verify-moment", "Monte Carlo check of the moment inequality");
    mom_process.attach(verify);
    verify->add_option("--kernel", mom.kernel, "epanechnikov, compact4, fejer or haar");
    verify->add_option("--m", mom.m, "bandwidth index");
    verify->add_option("--q", mom.q, "moment order, 2 or 4");
    verify->add_option("-n", mom.n, "sum length, at most 64");
    verify->add_option("--replicates", mom.replicates, "Monte Carlo replicates");
    verify->add_option("--x", mom.x, "evaluation point");
    verify->add_option("--slack", mom.slack, "relative slack on the bound");

    std::string exp_config;
    std::string exp_svg;
    auto* experiment = app.add_subcommand("experiment", "run a convergence-rate experiment from a config file");
    experiment->add_option("config", exp_config, "config file")->required();
    experiment->add_option("--svg", exp_svg, "also write a log-log plot");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            run_simulate(g, sim_process, sim_n);
            return 0;
        }
        if (estimate->parsed()) {
            run_estimate(g, est_process, est);
            return 0;
        }
        if (rates->parsed())
            return run_rates(g, rates_opts);
        if (verify->parsed())
            return run_verify_moment(g, mom_process, mom);
        if (experiment->parsed())
            return run_experiment_cmd(g, exp_config, exp_svg);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        fmt::print(stderr, "wdde: {}\n", e.what());
        return 1;
    }
    return 0;
}
