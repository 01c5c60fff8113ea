#include "wdde/errors.hpp"
#include "wdde/harness.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <set>
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

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    if (trim(s).empty())
        return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(std::string_view(s).substr(start, pos - start)));
        if (pos == std::string::npos)
            break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_number(const std::string& text)
{
    const std::string s = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw DomainError(fmt::format("'{}' is not a valid number", s));
    return value;
}

// "name(arg, arg)" -> (name, args); a bare name has no args.
std::pair<std::string, std::vector<std::string>> parse_call(const std::string& text)
{
    const std::string s = trim(text);
    const auto open = s.find('(');
    if (open == std::string::npos)
        return {s, {}};
    if (s.back() != ')')
        throw DomainError(fmt::format("'{}': missing closing parenthesis", s));
    return {trim(s.substr(0, open)), split(s.substr(open + 1, s.size() - open - 2), ',')};
}

std::vector<double> parse_doubles(const std::string& text)
{
    std::vector<double> out;
    for (const auto& item : split(text, ','))
        out.push_back(parse_number<double>(item));
    return out;
}

void expect_args(const std::string& name, const std::vector<std::string>& args, std::size_t count)
{
    if (args.size() != count)
        throw DomainError(fmt::format("{} takes {} argument{} (got {})", name, count, count == 1 ? "" : "s",
                                      args.size()));
}

Stride parse_stride(const std::string& text)
{
    const auto [name, args] = parse_call(text);
    if (name == "arithmetic" && args.size() == 1)
        return Arithmetic{parse_number<std::size_t>(args[0])};
    if (name == "geometric" && args.size() == 1)
        return Geometric{parse_number<std::size_t>(args[0])};
    throw DomainError(fmt::format("'{}' is not a stride (expected arithmetic(k) or geometric(b))", trim(text)));
}

// "power:A:R" or "offset:value, offset:value, ..."
struct ParsedCoefficients
{
    CoefficientMap coeffs;
    std::optional<double> power_decay;
};

ParsedCoefficients parse_coefficients(const std::string& text)
{
    const std::string s = trim(text);
    if (s.rfind("power:", 0) == 0) {
        const auto parts = split(s, ':');
        if (parts.size() != 3)
            throw DomainError("power-law coefficients are written power:<decay>:<radius>");
        const double decay = parse_number<double>(parts[1]);
        return {power_law_coefficients(decay, parse_number<int>(parts[2])), decay};
    }
    ParsedCoefficients out;
    for (const auto& item : split(s, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw DomainError(fmt::format("coefficient '{}' is not of the form offset:value", item));
        const int offset = parse_number<int>(item.substr(0, colon));
        if (!out.coeffs.emplace(offset, parse_number<double>(item.substr(colon + 1))).second)
            throw DomainError(fmt::format("duplicate coefficient offset {}", offset));
    }
    if (out.coeffs.empty())
        throw DomainError("empty coefficient list");
    return out;
}

std::string format_coefficients(const CoefficientMap& coeffs)
{
    std::vector<std::string> items;
    for (const auto& [offset, value] : coeffs)
        items.push_back(fmt::format("{}:{}", offset, value));
    return fmt::format("{}", fmt::join(items, ", "));
}

std::string format_stride(const Stride& stride)
{
    return std::visit(overloaded{
                          [](const Arithmetic& a) { return fmt::format("arithmetic({})", a.step); },
                          [](const Geometric& g) { return fmt::format("geometric({})", g.base); },
                      },
                      stride);
}

struct Entry
{
    std::string value;
    std::size_t line = 0;
    bool used = false;
};

const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"experiment", {"seed", "replicates", "n_grid", "tolerance", "pilot_samples", "pilot_m", "cache_dir"}},
        {"process",
         {"kind", "base_kind", "innovations", "coefficients", "x0", "a", "b", "ar", "ma", "burn_in", "p", "stride",
          "dependence", "base_dependence"}},
        {"estimator", {"kernel"}},
        {"bandwidth", {"rule", "m", "c", "exponent"}},
        {"metric", {"type", "x", "q", "lo", "hi", "points", "weight", "M"}},
        {"theory", {"theorem", "rho", "d", "q", "decay"}},
    };
    return keys;
}

// One parsed [section]; values are read through take() so that keys that do
// not apply to the chosen variant can be reported.
class Section
{
public:
    Section(std::string name, std::size_t line)
        : name_(std::move(name))
        , line_(line)
    {
    }

    void add(const std::string& key, std::string value, std::size_t line)
    {
        if (!entries_.emplace(key, Entry{std::move(value), line}).second)
            throw ParseError(line, fmt::format("duplicate key '{}' in [{}]", key, name_));
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::size_t line_of(const std::string& key) const
    {
        const auto it = entries_.find(key);
        return it == entries_.end() ? line_ : it->second.line;
    }

    // Parses a key with `parse`, reporting failures at the key's line.
    template <class F>
    auto take(const std::string& key, F&& parse) -> std::optional<decltype(parse(std::string{}))>
    {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            return std::nullopt;
        it->second.used = true;
        try {
            return parse(it->second.value);
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(it->second.line, fmt::format("[{}] {}: {}", name_, key, e.what()));
        }
    }

    std::optional<std::string> take(const std::string& key)
    {
        return take(key, [](const std::string& v) { return v; });
    }

    // Keys left unread do not apply to the selected variant.
    void finish(const std::string& context) const
    {
        for (const auto& [key, entry] : entries_)
            if (!entry.used)
                throw ParseError(entry.line, fmt::format("key '{}' does not apply to {}", key, context));
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::string name_;
    std::size_t line_;
    std::map<std::string, Entry> entries_;
};

template <class F>
auto guarded(std::size_t line, F&& f)
{
    try {
        return f();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(line, e.what());
    }
}

const auto as_double = [](const std::string& v) { return parse_number<double>(v); };
const auto as_int = [](const std::string& v) { return parse_number<int>(v); };
const auto as_size = [](const std::string& v) { return parse_number<std::size_t>(v); };

ProcessParams parse_process_params(Section& s, const std::string& kind, std::optional<double>& power_decay)
{
    const auto innovations = [&](InnovationSpec fallback) {
        return s.take("innovations", parse_innovations).value_or(std::move(fallback));
    };
    if (kind == "doubling") {
        DoublingParams p;
        p.x0 = s.take("x0", as_double);
        p.innovations = innovations(Bernoulli{0.5});
        return p;
    }
    if (kind == "linear") {
        auto parsed = s.take("coefficients", parse_coefficients);
        if (!parsed)
            throw ParseError(s.line_of("kind"), "linear process needs 'coefficients'");
        power_decay = parsed->power_decay;
        return LinearParams{std::move(parsed->coeffs), innovations(Gaussian{})};
    }
    if (kind == "bilinear") {
        BilinearParams p;
        p.a = s.take("a", as_double).value_or(p.a);
        p.b = s.take("b", as_double).value_or(p.b);
        p.ar = s.take("ar", parse_doubles).value_or(p.ar);
        p.ma = s.take("ma", parse_doubles).value_or(p.ma);
        p.innovations = innovations(p.innovations);
        p.burn_in = s.take("burn_in", as_size).value_or(p.burn_in);
        p.p = s.take("p", as_double).value_or(p.p);
        return p;
    }
    if (kind == "iid")
        return IidParams{innovations(Gaussian{})};
    throw ParseError(s.line_of("kind"), fmt::format("unknown process kind '{}'", kind));
}

ProcessSpec build_process(const ProcessParams& params, std::optional<DependenceBound> dependence,
                          std::optional<double> power_decay)
{
    if (const auto* lin = std::get_if<LinearParams>(&params); lin && power_decay && !dependence) {
        // power:A:R declares the power-law eta bound unless overridden
        const ProcessSpec declared = power_law_linear_process(*power_decay, 0, lin->innovations);
        dependence = declared.dependence;
    }
    if (const auto* bil = std::get_if<BilinearParams>(&params))
        return bilinear_process(*bil, dependence);
    ProcessSpec spec = make_process(params, dependence);
    validate(spec);
    return spec;
}

ProcessSpec parse_process_section(Section& s)
{
    const std::string kind = trim(s.take("kind").value_or("iid"));
    const auto dependence = s.take("dependence", parse_dependence);
    if (kind == "sampled") {
        const std::string base_kind = trim(s.take("base_kind").value_or(""));
        if (base_kind.empty())
            throw ParseError(s.line_of("kind"), "sampled process needs 'base_kind'");
        if (base_kind == "sampled")
            throw ParseError(s.line_of("base_kind"), "nested sampled processes are not supported");
        const auto stride = s.take("stride", parse_stride).value_or(Arithmetic{1});
        std::optional<double> power_decay;
        const ProcessParams base_params = parse_process_params(s, base_kind, power_decay);
        const auto base_dependence = s.take("base_dependence", parse_dependence);
        s.finish(fmt::format("process kind 'sampled' with base '{}'", base_kind));
        return guarded(s.line_of("kind"), [&] {
            ProcessSpec spec = sampled_process(build_process(base_params, base_dependence, power_decay), stride);
            if (dependence)
                spec.dependence = dependence;
            return spec;
        });
    }
    std::optional<double> power_decay;
    const ProcessParams params = parse_process_params(s, kind, power_decay);
    s.finish(fmt::format("process kind '{}'", kind));
    return guarded(s.line_of("kind"), [&] { return build_process(params, dependence, power_decay); });
}

Metric parse_metric_section(Section& s)
{
    const std::string type = trim(s.take("type").value_or("pointwise"));
    Metric metric;
    if (type == "pointwise") {
        PointwiseLq p;
        p.x = s.take("x", as_double).value_or(p.x);
        p.q = s.take("q", as_double).value_or(p.q);
        metric = p;
    } else if (type == "mise") {
        Mise p;
        p.lo = s.take("lo", as_double).value_or(p.lo);
        p.hi = s.take("hi", as_double).value_or(p.hi);
        p.points = s.take("points", as_int).value_or(p.points);
        p.weight = s.take("weight", [](const std::string& v) -> MiseWeight {
                        const auto [name, args] = parse_call(v);
                        if (name == "indicator" && args.empty())
                            return IndicatorWeight{};
                        if (name == "gaussian") {
                            expect_args(name, args, 2);
                            return GaussianWeight{parse_number<double>(args[0]), parse_number<double>(args[1])};
                        }
                        throw DomainError(fmt::format("unknown weight '{}' (expected indicator or gaussian(mean, sd))",
                                                      trim(v)));
                    }).value_or(p.weight);
        metric = p;
    } else if (type == "sup") {
        SupNorm p;
        p.M = s.take("M", as_double).value_or(p.M);
        p.points = s.take("points", as_int).value_or(p.points);
        metric = p;
    } else {
        throw ParseError(s.line_of("type"), fmt::format("unknown metric type '{}' (expected pointwise, mise or sup)", type));
    }
    s.finish(fmt::format("metric type '{}'", type));
    return metric;
}

BandwidthChoice parse_bandwidth_section(Section& s)
{
    const std::string rule = trim(s.take("rule").value_or("theorem"));
    BandwidthChoice choice;
    if (rule == "theorem") {
        choice = TheoremBandwidth{};
    } else if (rule == "fixed") {
        const auto m = s.take("m", as_int);
        if (!m)
            throw ParseError(s.line_of("rule"), "fixed bandwidth needs 'm'");
        choice = FixedBandwidth{*m};
    } else if (rule == "power") {
        PowerLawBandwidth p;
        p.c = s.take("c", as_double).value_or(p.c);
        p.exponent = s.take("exponent", as_double).value_or(p.exponent);
        choice = p;
    } else {
        throw ParseError(s.line_of("rule"), fmt::format("unknown bandwidth rule '{}' (expected theorem, fixed or power)", rule));
    }
    s.finish(fmt::format("bandwidth rule '{}'", rule));
    return choice;
}

std::vector<std::size_t> parse_n_grid(const std::string& text)
{
    const std::string s = trim(text);
    if (s.rfind("pow2:", 0) == 0) {
        const auto parts = split(s, ':');
        if (parts.size() != 3)
            throw DomainError("powers of two are written pow2:<first>:<last>");
        const int first = parse_number<int>(parts[1]);
        const int last = parse_number<int>(parts[2]);
        if (first < 1 || last < first || last > 40)
            throw DomainError("pow2 exponents need 1 <= first <= last <= 40");
        std::vector<std::size_t> out;
        for (int k = first; k <= last; ++k)
            out.push_back(std::size_t{1} << k);
        return out;
    }
    std::vector<std::size_t> out;
    for (const auto& item : split(s, ','))
        out.push_back(parse_number<std::size_t>(item));
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

InnovationSpec parse_innovations(const std::string& text)
{
    const auto [name, args] = parse_call(text);
    if (name == "bernoulli") {
        expect_args(name, args, 1);
        return Bernoulli{parse_number<double>(args[0])};
    }
    if (name == "gaussian") {
        expect_args(name, args, 2);
        return Gaussian{parse_number<double>(args[0]), parse_number<double>(args[1])};
    }
    if (name == "uniform") {
        expect_args(name, args, 2);
        return Uniform{parse_number<double>(args[0]), parse_number<double>(args[1])};
    }
    if (name == "fixed") {
        Fixed f;
        for (const auto& a : args)
            f.values.push_back(parse_number<double>(a));
        return f;
    }
    throw DomainError(fmt::format("unknown innovation law '{}' (expected bernoulli, gaussian, uniform or fixed)", name));
}

std::string format_innovations(const InnovationSpec& spec)
{
    return describe(spec);
}

DependenceBound parse_dependence(const std::string& text)
{
    const std::string s = trim(text);
    const auto space = s.find(' ');
    if (space == std::string::npos)
        throw DomainError(fmt::format("'{}': expected '<eta|phi> <geometric(a, b)|riemannian(a)> [constant]'", s));
    DependenceBound bound;
    const std::string coef = s.substr(0, space);
    if (coef == "eta")
        bound.coefficient = DependenceCoefficient::Eta;
    else if (coef == "phi")
        bound.coefficient = DependenceCoefficient::PhiTilde;
    else
        throw DomainError(fmt::format("unknown dependence coefficient '{}' (expected eta or phi)", coef));
    const auto close = s.find(')', space);
    if (close == std::string::npos)
        throw DomainError(fmt::format("'{}': decay shape needs parentheses", s));
    const auto [family, args] = parse_call(s.substr(space + 1, close - space));
    if (family == "geometric") {
        expect_args(family, args, 2);
        bound.decay = GeometricDecay{parse_number<double>(args[0]), parse_number<double>(args[1])};
    } else if (family == "riemannian") {
        expect_args(family, args, 1);
        bound.decay = RiemannianDecay{parse_number<double>(args[0])};
    } else {
        throw DomainError(fmt::format("unknown decay family '{}' (expected geometric or riemannian)", family));
    }
    const std::string rest = trim(s.substr(close + 1));
    bound.constant = rest.empty() ? 1.0 : parse_number<double>(rest);
    bound.validate();
    return bound;
}

std::string format_dependence(const DependenceBound& bound)
{
    const char* coef = bound.coefficient == DependenceCoefficient::Eta ? "eta" : "phi";
    const std::string shape =
        std::visit(overloaded{
                       [](const GeometricDecay& g) { return fmt::format("geometric({}, {})", g.a, g.b); },
                       [](const RiemannianDecay& r) { return fmt::format("riemannian({})", r.a); },
                   },
                   bound.decay);
    return fmt::format("{} {} {}", coef, shape, bound.constant);
}

KernelFamily parse_kernel(const std::string& name)
{
    const std::string s = trim(name);
    if (s == "epanechnikov")
        return KernelFamily::compact(2);
    if (s == "compact4")
        return KernelFamily::compact(4);
    if (s == "fejer")
        return KernelFamily::fejer();
    if (s == "haar")
        return KernelFamily::haar();
    throw DomainError(fmt::format("unknown kernel '{}' (expected epanechnikov, compact4, fejer or haar)", s));
}

namespace {

std::string format_params(const ProcessParams& params)
{
    return std::visit(overloaded{
                          [](const DoublingParams& p) {
                              std::string out;
                              if (p.x0)
                                  out += fmt::format("x0 = {}\n", *p.x0);
                              return out + fmt::format("innovations = {}\n", format_innovations(p.innovations));
                          },
                          [](const LinearParams& p) {
                              return fmt::format("innovations = {}\ncoefficients = {}\n",
                                                 format_innovations(p.innovations), format_coefficients(p.coeffs));
                          },
                          [](const BilinearParams& p) {
                              return fmt::format("innovations = {}\na = {}\nb = {}\nar = {}\nma = {}\nburn_in = {}\n"
                                                 "p = {}\n",
                                                 format_innovations(p.innovations), p.a, p.b, fmt::join(p.ar, ", "),
                                                 fmt::join(p.ma, ", "), p.burn_in, p.p);
                          },
                          [](const SampledParams&) -> std::string {
                              throw DomainError("nested sampled processes are not supported");
                          },
                          [](const IidParams& p) {
                              return fmt::format("innovations = {}\n", format_innovations(p.innovations));
                          },
                      },
                      params);
}

std::string kind_name(ProcessKind kind)
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

} // namespace

std::string format_process(const ProcessSpec& spec)
{
    std::string out = fmt::format("kind = {}\n", kind_name(spec.kind));
    if (const auto* sampled = std::get_if<SampledParams>(&spec.params)) {
        if (!sampled->base)
            throw DomainError("sampled process without a base process");
        const ProcessSpec& base = *sampled->base;
        out += fmt::format("base_kind = {}\nstride = {}\n", kind_name(base.kind), format_stride(sampled->stride));
        out += format_params(base.params);
        if (base.dependence)
            out += fmt::format("base_dependence = {}\n", format_dependence(*base.dependence));
    } else {
        out += format_params(spec.params);
    }
    if (spec.dependence)
        out += fmt::format("dependence = {}\n", format_dependence(*spec.dependence));
    return out;
}

std::string format_config(const ExperimentConfig& config)
{
    std::string out;
    out += "[experiment]\n";
    out += fmt::format("seed = {}\nreplicates = {}\nn_grid = {}\ntolerance = {}\n", config.seed, config.replicates,
                       fmt::join(config.n_grid, ", "), config.tolerance);
    out += fmt::format("pilot_samples = {}\npilot_m = {}\ncache_dir = {}\n", config.pilot.samples, config.pilot.m,
                       config.pilot.cache_dir);

    out += "\n[process]\n" + format_process(config.process);

    out += fmt::format("\n[estimator]\nkernel = {}\n", config.estimator.name());

    out += "\n[bandwidth]\n";
    out += std::visit(overloaded{
                          [](const TheoremBandwidth&) { return std::string("rule = theorem\n"); },
                          [](const FixedBandwidth& f) { return fmt::format("rule = fixed\nm = {}\n", f.m); },
                          [](const PowerLawBandwidth& p) {
                              return fmt::format("rule = power\nc = {}\nexponent = {}\n", p.c, p.exponent);
                          },
                      },
                      config.bandwidth);

    out += "\n[metric]\n";
    out += std::visit(
        overloaded{
            [](const PointwiseLq& p) { return fmt::format("type = pointwise\nx = {}\nq = {}\n", p.x, p.q); },
            [](const Mise& p) {
                const std::string weight =
                    std::visit(overloaded{
                                   [](const IndicatorWeight&) { return std::string("indicator"); },
                                   [](const GaussianWeight& g) { return fmt::format("gaussian({}, {})", g.mean, g.sd); },
                               },
                               p.weight);
                return fmt::format("type = mise\nlo = {}\nhi = {}\npoints = {}\nweight = {}\n", p.lo, p.hi, p.points,
                                   weight);
            },
            [](const SupNorm& p) { return fmt::format("type = sup\nM = {}\npoints = {}\n", p.M, p.points); },
        },
        config.metric);

    const RateParams& t = config.theory;
    out += fmt::format("\n[theory]\ntheorem = {}\nrho = {}\nd = {}\nq = {}\ndecay = {}\n", to_string(t.theorem), t.rho,
                       t.d, t.q, format_dependence(t.decay));
    return out;
}

ExperimentConfig parse_config(std::istream& in)
{
    std::map<std::string, Section> sections;
    Section* current = nullptr;
    std::string current_name;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(line_no, fmt::format("malformed section header '{}'", line));
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (!known_keys().count(name))
                throw ParseError(line_no, fmt::format("unknown section [{}]", name));
            if (sections.count(name))
                throw ParseError(line_no, fmt::format("duplicate section [{}]", name));
            current = &sections.emplace(name, Section(name, line_no)).first->second;
            current_name = name;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(line_no, fmt::format("expected 'key = value', got '{}'", line));
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ParseError(line_no, "missing key before '='");
        if (!current)
            throw ParseError(line_no, fmt::format("key '{}' appears before any [section]", key));
        if (!known_keys().at(current_name).count(key))
            throw ParseError(line_no, fmt::format("unknown key '{}' in [{}]", key, current_name));
        current->add(key, trim(line.substr(eq + 1)), line_no);
    }
    if (in.bad())
        throw ParseError(0, "read error");

    Section empty("", 0);
    const auto section = [&](const std::string& name) -> Section& {
        const auto it = sections.find(name);
        return it == sections.end() ? empty : it->second;
    };

    ExperimentConfig config;
    {
        Section& s = section("experiment");
        config.seed = s.take("seed", [](const std::string& v) { return parse_number<std::uint64_t>(v); })
                          .value_or(config.seed);
        config.replicates = s.take("replicates", as_size).value_or(config.replicates);
        config.n_grid = s.take("n_grid", parse_n_grid).value_or(config.n_grid);
        config.tolerance = s.take("tolerance", as_double).value_or(config.tolerance);
        config.pilot.samples = s.take("pilot_samples", as_size).value_or(config.pilot.samples);
        config.pilot.m = s.take("pilot_m", as_int).value_or(config.pilot.m);
        config.pilot.cache_dir = s.take("cache_dir").value_or(config.pilot.cache_dir);
        s.finish("[experiment]");
    }
    if (sections.count("process"))
        config.process = parse_process_section(sections.at("process"));
    if (auto kernel = section("estimator").take("kernel", parse_kernel))
        config.estimator = *kernel;
    if (sections.count("bandwidth"))
        config.bandwidth = parse_bandwidth_section(sections.at("bandwidth"));
    if (sections.count("metric"))
        config.metric = parse_metric_section(sections.at("metric"));
    {
        Section& s = section("theory");
        RateParams& t = config.theory;
        t.theorem = s.take("theorem", theorem_from_string).value_or(t.theorem);
        t.rho = s.take("rho", as_double).value_or(t.rho);
        t.d = s.take("d", as_int).value_or(t.d);
        t.q = s.take("q", as_int).value_or(t.q);
        t.decay = s.take("decay", parse_dependence).value_or(t.decay);
        s.finish("[theory]");
    }

    const std::size_t anchor = sections.count("experiment") ? sections.at("experiment").line() : 0;
    guarded(anchor, [&] {
        validate(config);
        return 0;
    });
    return config;
}

ExperimentConfig parse_config_string(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

ExperimentConfig read_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error(fmt::format("cannot open config '{}'", path.string()));
    return parse_config(in);
}

void write_config(const ExperimentConfig& config, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
    out << format_config(config);
    if (!out)
        throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

} // namespace wdde
