#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "sns/config.hpp"
#include "sns/experiments.hpp"
#include "sns/io.hpp"

using namespace sns;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("sns_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Cli {
    int code;
    std::string out;
};

Cli cli(const std::string& args, const std::string& env = {})
{
    const auto log = fs::temp_directory_path() / "sns_harness_cli.log";
    const std::string cmd = env + " " + std::string(SNS_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

std::string write_ini(const fs::path& dir, const std::string& name, const std::string& body)
{
    const auto p = dir / name;
    std::ofstream(p) << body;
    return p.string();
}

std::string config_error(const std::string& text)
{
    try {
        parse_config(text, experiment_defaults);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("parse_config overrides registry defaults")
{
    const auto cfg = parse_config("[experiment]\nname = mild-formulation\nseed = 9\n"
                                  "[solver]\ndt = 2e-3\nintegrator = exponential-euler\n"
                                  "[noise]\ngamma = 0.4\n",
                                  experiment_defaults);
    CHECK(cfg.name == "mild-formulation");
    CHECK(cfg.seed == 9);
    CHECK(cfg.n == 32);
    CHECK(cfg.solver.dt == 2e-3);
    CHECK(cfg.solver.integrator == Integrator::ExponentialEuler);
    CHECK(cfg.coloring.gamma == 0.4);
    CHECK(cfg.solver.epsilon == doctest::Approx(0.15));
}

TEST_CASE("config comments")
{
    const auto cfg = parse_config("; leading\n[experiment]  # section\nname = ou-law ; inline\n# line\n[mc]\nM = 20 ; m\n",
                                  experiment_defaults);
    CHECK(cfg.name == "ou-law");
    CHECK(cfg.M == 20);
}

TEST_CASE("config errors name the field")
{
    CHECK(config_error("[experiment]\nname = mild-formulation\n[solver]\ndt = -1e-3\n").rfind("solver.dt:", 0) == 0);
    CHECK(config_error("[experiment]\nname = mild-formulation\n[solver]\ndtt = 1e-3\n").rfind("solver.dtt:", 0) == 0);
    CHECK(config_error("[experiment]\nname = mild-formulation\n[extra]\nx = 1\n").rfind("extra:", 0) == 0);
    CHECK(config_error("[experiment]\nname = nope\n").rfind("experiment.name:", 0) == 0);
    CHECK(config_error("[model]\nn = 4\n").rfind("experiment.name:", 0) == 0);
    CHECK(config_error("[experiment]\nname = ou-law\n[model]\nn = 1x\n").rfind("model.n:", 0) == 0);
    CHECK(config_error("[experiment]\nname = ou-law\n[noise]\ngamma = 0.2\n").rfind("noise.gamma:", 0) == 0);
    CHECK(config_error("[experiment]\nname = ou-law\n[mc]\nM = 1\n").rfind("mc.M:", 0) == 0);
    CHECK(config_error("[experiment]\nname = ergodicity-mixing\n[mc]\nburn_in = 60\n").rfind("mc.burn_in:", 0) == 0);
    CHECK(config_error("[experiment]\nname = apriori-uniformity\n[model]\nlevels = 32, 16\n").rfind("model.levels:", 0) ==
          0);
    CHECK(config_error("[experiment]\nname = mild-formulation\n[solver]\nT = 1.0005\n").rfind("solver.T:", 0) == 0);
    CHECK(config_error("[experiment]\nname = mild-formulation\n[solver]\nintegrator = rk4\n")
              .rfind("solver.integrator:", 0) == 0);
}

TEST_CASE("canonical text and hash ignore output locations")
{
    auto a = experiment_defaults("smoothing-grid");
    auto b = a;
    b.output_dir = "elsewhere";
    b.cache_dir = "cache";
    CHECK(a.canonical() == b.canonical());
    CHECK(a.hash() == b.hash());
    b.seed += 1;
    CHECK(a.hash() != b.hash());
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("every registered default validates")
{
    for (const auto& e : experiment_registry()) {
        CAPTURE(e.name);
        const auto cfg = experiment_defaults(e.name);
        CHECK_NOTHROW(cfg.validate());
        CHECK(cfg.name == e.name);
        CHECK_FALSE(e.anchor.empty());
    }
}

TEST_CASE("ArtifactWriter output and manifest")
{
    const auto dir = scratch("writer");
    ArtifactWriter w(dir, 0x1234);
    w.write_csv("a.csv", {"x", "y"}, {{0.1, 1.0 / 3.0}});
    CHECK(slurp(dir / "a.csv") == "x,y\n0.10000000000000001,0.33333333333333331\n");
    CHECK_THROWS_AS(w.write_csv("b.csv", {"x"}, {{1.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(w.write_text("../escape", "x"), std::invalid_argument);
    w.write_histogram("h.csv", {0.0, 1.0, 2.0}, {3, 4});
    CHECK_THROWS_AS(w.write_histogram("bad.csv", {0.0, 1.0}, {3, 4}), std::invalid_argument);
    PathSample p;
    p.times = {0.0, 0.5};
    p.fields = {{1.0, 2.0}, {3.0, 4.0}};
    p.seed = 5;
    w.write_path("p.csv", p);
    w.record_estimate("demo", {1.5, 0.25, 10}, 42);
    const auto m = w.finish();
    CHECK(m["config_hash"] == "0000000000001234");
    CHECK(m["files"].size() == 5);
    for (const auto& f : m["files"]) {
        const auto bytes = slurp(dir / f["name"].get<std::string>());
        CHECK(f["bytes"].get<std::size_t>() == bytes.size());
        CHECK(f["fnv1a"] == hex64(fnv1a(bytes)));
    }
    const auto est = nlohmann::json::parse(slurp(dir / "estimates.json"));
    CHECK(est[0]["value"] == 1.5);
    CHECK(est[0]["seed"] == 42);
    CHECK(nlohmann::json::parse(slurp(dir / "p.csv.json"))["seed"] == 5);
}

TEST_CASE("run_experiment writes summary and manifest")
{
    auto cfg = experiment_defaults("smoothing-grid");
    cfg.output_dir = scratch("run");
    const auto res = run_experiment(cfg);
    CHECK(res.report.passed());
    const auto summary = nlohmann::json::parse(slurp(cfg.output_dir / "summary.json"));
    CHECK(summary["passed"] == true);
    CHECK(summary["anchor"] == find_experiment("smoothing-grid").anchor);
    for (const auto& c : summary["checks"]) CHECK_FALSE(c["anchor"].get<std::string>().empty());
    CHECK(fs::exists(cfg.output_dir / "manifest.json"));
}

TEST_CASE("CLI: list")
{
    const auto a = cli("list");
    CHECK(a.code == 0);
    CHECK(a.out.find("bismut-vs-fd") != std::string::npos);
    CHECK(a.out.find("Bismut-Elworthy gradient formula") != std::string::npos);
    CHECK(a.out.find("control-reachability") != std::string::npos);
    CHECK(a.out.find("control steering x to y") != std::string::npos);
    CHECK(cli("list").out == a.out);
    CHECK(a.out.find("smoothing-grid") < a.out.find("ergodicity-mixing"));
}

TEST_CASE("CLI: exit codes")
{
    const auto dir = scratch("cli");
    const auto bad = write_ini(dir, "bad.ini", "[experiment]\nname = smoothing-grid\n[solver]\ndt = -0.001\n");
    const auto v = cli("validate " + bad);
    CHECK(v.code == 2);
    CHECK(v.out.find("solver.dt") != std::string::npos);
    CHECK(cli("run " + bad).code == 2);
    CHECK(cli("run " + (dir / "missing.ini").string()).code == 2);

    const auto ok = write_ini(dir, "ok.ini",
                              "[experiment]\nname = smoothing-grid\noutput_dir = " + (dir / "out").string() + "\n");
    CHECK(cli("validate " + ok).code == 0);
    const auto r = cli("run " + ok);
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
    CHECK(cli("list", "SNS_WORKERS=0").code == 2);
    CHECK(cli("list", "SNS_WORKERS=2").code == 0);

    // a point far beyond the blow-up threshold
    const auto blow = write_ini(dir, "blow.ini",
                                "[experiment]\nname = mild-formulation\noutput_dir = " + (dir / "blow").string() +
                                    "\n[noise]\nscale = 1e9\n[solver]\ndt = 0.005\n");
    CHECK(cli("run " + blow).code == 3);
}
