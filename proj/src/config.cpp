#include "sns/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sns {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) { throw ConfigError(field + ": " + msg); }

void require(bool cond, const std::string& field, const std::string& msg)
{
    if (!cond) fail(field, msg);
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& raw)
{
    const auto s = trim(raw);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || p != end) fail(field, "expected a number, got '" + raw + "'");
    if (!std::isfinite(v)) fail(field, "must be finite");
    return v;
}

std::uint64_t parse_uint(const std::string& field, const std::string& raw)
{
    const auto s = trim(raw);
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || p != end) fail(field, "expected a nonnegative integer, got '" + raw + "'");
    return v;
}

std::vector<std::string> split_list(const std::string& raw)
{
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

std::vector<double> parse_doubles(const std::string& field, const std::string& raw)
{
    std::vector<double> out;
    for (const auto& item : split_list(raw)) out.push_back(parse_double(field, item));
    if (out.empty()) fail(field, "expected a comma-separated list");
    return out;
}

const std::map<std::string, std::set<std::string>>& allowed_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"experiment", {"name", "seed", "output_dir"}},
        {"model", {"backend", "n", "levels", "slope", "cache_dir"}},
        {"noise", {"kind", "gamma", "epsilon", "scale", "sigma_exponent", "band_a", "band_b", "raw"}},
        {"solver", {"dt", "T", "integrator", "p", "gamma_monitor", "cutoff_R"}},
        {"mc", {"M", "burn_in", "thinning"}},
    };
    return keys;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>)
            out += fmt(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

double effective_epsilon(const ColoringSpec& c)
{
    if (c.epsilon >= 0.0) return c.epsilon;
    return c.kind == ColoringKind::PowerLaw ? c.gamma - 0.25 : 0.25;
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

Spectrum ExperimentConfig::spectrum(std::size_t modes) const { return build_spectrum(backend, modes, slope); }

Coloring ExperimentConfig::make_coloring_for(const Spectrum& s) const
{
    ColoringSpec spec = coloring;
    if (spec.kind == ColoringKind::SigmaSequence && spec.sigma.size() == 1) {
        const double e = spec.sigma[0];
        spec.sigma.resize(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) spec.sigma[k] = std::pow(static_cast<double>(k + 1), e);
    }
    if (spec.kind != ColoringKind::PowerLaw && spec.epsilon < 0.0) spec.epsilon = 0.25;
    return make_coloring(spec, s);
}

void ExperimentConfig::validate() const
{
    require(!name.empty(), "experiment.name", "missing");
    require(n >= 2, "model.n", "must be at least 2");
    require(slope > 0.0, "model.slope", "must be positive");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        require(levels[i] >= 2, "model.levels", "entries must be at least 2");
        if (i) require(levels[i] > levels[i - 1], "model.levels", "must be strictly increasing");
    }
    if (!levels.empty()) require(levels.back() <= n, "model.levels", "largest level must not exceed model.n");

    require(coloring.scale > 0.0, "noise.scale", "must be positive");
    if (coloring.kind == ColoringKind::PowerLaw)
        require(coloring.gamma > 0.25 && coloring.gamma <= 0.5, "noise.gamma", "must lie in (1/4, 1/2]");
    const double eps = effective_epsilon(coloring);
    require(eps > 0.0 && eps <= 0.25, "noise.epsilon", "must lie in (0, 1/4]");
    if (coloring.kind == ColoringKind::PowerLaw)
        require(eps <= coloring.gamma - 0.25 + 1e-15, "noise.epsilon", "must not exceed gamma - 1/4");
    if (coloring.kind == ColoringKind::SigmaSequence)
        require(coloring.sigma.size() == 1, "noise.sigma_exponent", "required for sigma-sequence colorings");
    if (coloring.kind == ColoringKind::Raw) require(!coloring.raw.empty(), "noise.raw", "required for raw colorings");
    try {
        const auto s = spectrum(n);
        make_coloring_for(s);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail("noise", e.what());
    }

    try {
        auto sc = solver;
        sc.epsilon = eps;
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("solver." + std::string(e.what()));
    }
    require(cutoff_R > 0.0, "solver.cutoff_R", "must be positive");

    require(M >= 2, "mc.M", "must be at least 2");
    require(burn_in >= 0.0 && burn_in < solver.T, "mc.burn_in", "must lie in [0, T)");
    require(thinning >= 1, "mc.thinning", "must be at least 1");
}

std::string ExperimentConfig::canonical() const
{
    std::ostringstream os;
    os << "experiment.name = " << name << "\n"
       << "experiment.seed = " << seed << "\n"
       << "model.backend = " << to_string(backend) << "\n"
       << "model.n = " << n << "\n"
       << "model.levels = " << join(levels) << "\n"
       << "model.slope = " << fmt(slope) << "\n"
       << "noise.kind = " << to_string(coloring.kind) << "\n"
       << "noise.gamma = " << fmt(coloring.gamma) << "\n"
       << "noise.epsilon = " << fmt(effective_epsilon(coloring)) << "\n"
       << "noise.scale = " << fmt(coloring.scale) << "\n"
       << "noise.sigma = " << join(coloring.sigma) << "\n"
       << "noise.band = " << fmt(coloring.band_a) << "," << fmt(coloring.band_b) << "\n"
       << "noise.raw = " << join(coloring.raw) << "\n"
       << "solver.dt = " << fmt(solver.dt) << "\n"
       << "solver.T = " << fmt(solver.T) << "\n"
       << "solver.integrator = " << to_string(solver.integrator) << "\n"
       << "solver.p = " << fmt(solver.p) << "\n"
       << "solver.gamma_monitor = " << join(solver.gamma_monitor) << "\n"
       << "solver.cutoff_R = " << fmt(cutoff_R) << "\n"
       << "mc.M = " << M << "\n"
       << "mc.burn_in = " << fmt(burn_in) << "\n"
       << "mc.thinning = " << thinning << "\n";
    return os.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical()); }

ExperimentConfig parse_config(const std::string& text, ExperimentConfig (*defaults)(const std::string& name))
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::string stripped;
    {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) stripped += line.substr(0, line.find_first_of(";#")) + "\n";
    }
    try {
        std::istringstream in(stripped);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    const auto& keys = allowed_keys();
    for (const auto& [section, body] : tree) {
        if (!body.data().empty()) fail(section, "key outside of a section");
        const auto it = keys.find(section);
        if (it == keys.end()) fail(section, "unknown section");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) fail(section + "." + key, "unknown key");
            if (!value.empty()) fail(section + "." + key, "unexpected nesting");
        }
    }

    const auto name = tree.get_optional<std::string>("experiment.name");
    if (!name) fail("experiment.name", "missing");
    ExperimentConfig cfg = defaults(trim(*name));

    auto get = [&](const std::string& path) { return tree.get_optional<std::string>(path); };
    if (auto v = get("experiment.seed")) cfg.seed = parse_uint("experiment.seed", *v);
    if (auto v = get("experiment.output_dir")) cfg.output_dir = trim(*v);

    if (auto v = get("model.backend")) {
        try {
            cfg.backend = backend_from_string(trim(*v));
        } catch (const std::invalid_argument& e) {
            fail("model.backend", e.what());
        }
    }
    if (auto v = get("model.n")) cfg.n = parse_uint("model.n", *v);
    if (auto v = get("model.levels")) {
        cfg.levels.clear();
        for (const auto& item : split_list(*v)) cfg.levels.push_back(parse_uint("model.levels", item));
    }
    if (auto v = get("model.slope")) cfg.slope = parse_double("model.slope", *v);
    if (auto v = get("model.cache_dir")) cfg.cache_dir = trim(*v);

    if (auto v = get("noise.kind")) {
        try {
            cfg.coloring.kind = coloring_kind_from_string(trim(*v));
        } catch (const std::invalid_argument& e) {
            fail("noise.kind", e.what());
        }
    }
    if (auto v = get("noise.gamma")) cfg.coloring.gamma = parse_double("noise.gamma", *v);
    if (auto v = get("noise.epsilon")) cfg.coloring.epsilon = parse_double("noise.epsilon", *v);
    if (auto v = get("noise.scale")) cfg.coloring.scale = parse_double("noise.scale", *v);
    if (auto v = get("noise.sigma_exponent")) cfg.coloring.sigma = {parse_double("noise.sigma_exponent", *v)};
    if (auto v = get("noise.band_a")) cfg.coloring.band_a = parse_double("noise.band_a", *v);
    if (auto v = get("noise.band_b")) cfg.coloring.band_b = parse_double("noise.band_b", *v);
    if (auto v = get("noise.raw")) cfg.coloring.raw = parse_doubles("noise.raw", *v);

    if (auto v = get("solver.dt")) cfg.solver.dt = parse_double("solver.dt", *v);
    if (auto v = get("solver.T")) cfg.solver.T = parse_double("solver.T", *v);
    if (auto v = get("solver.integrator")) {
        try {
            cfg.solver.integrator = integrator_from_string(trim(*v));
        } catch (const std::invalid_argument& e) {
            fail("solver.integrator", e.what());
        }
    }
    if (auto v = get("solver.p")) cfg.solver.p = parse_double("solver.p", *v);
    if (auto v = get("solver.gamma_monitor")) cfg.solver.gamma_monitor = parse_doubles("solver.gamma_monitor", *v);
    if (auto v = get("solver.cutoff_R")) cfg.cutoff_R = parse_double("solver.cutoff_R", *v);

    if (auto v = get("mc.M")) cfg.M = parse_uint("mc.M", *v);
    if (auto v = get("mc.burn_in")) cfg.burn_in = parse_double("mc.burn_in", *v);
    if (auto v = get("mc.thinning")) cfg.thinning = parse_uint("mc.thinning", *v);

    cfg.solver.epsilon = effective_epsilon(cfg.coloring);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig (*defaults)(const std::string& name))
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), defaults);
}

}  // namespace sns
