#include <omp.h>

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sns/config.hpp"
#include "sns/experiments.hpp"
#include "sns/solver.hpp"

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kInvalidConfig = 2, kBlowUp = 3 };

void apply_worker_env()
{
    const char* raw = std::getenv("SNS_WORKERS");
    if (!raw || !*raw) return;
    char* end = nullptr;
    const long w = std::strtol(raw, &end, 10);
    if (*end != '\0' || w < 1 || w > 4096)
        throw sns::ConfigError("SNS_WORKERS: expected a positive integer, got '" + std::string(raw) + "'");
    omp_set_num_threads(static_cast<int>(w));
}

int cmd_list()
{
    for (const auto& e : sns::experiment_registry())
        std::cout << std::left << std::setw(22) << e.name << std::setw(9) << sns::to_string(e.runtime) << e.anchor
                  << "\n";
    return kPass;
}

int cmd_validate(const std::string& path)
{
    const auto cfg = sns::load_config(path, sns::experiment_defaults);
    std::cout << cfg.canonical() << "ok\n";
    return kPass;
}

int cmd_run(const std::string& path)
{
    const auto cfg = sns::load_config(path, sns::experiment_defaults);
    const auto res = sns::run_experiment(cfg);
    for (const auto& c : res.report.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value << " threshold=" << c.threshold
                  << "  [" << c.anchor << "]\n";
    std::cout << res.report.experiment << ": " << (res.report.passed() ? "pass" : "FAIL") << "  ("
              << (cfg.output_dir / "summary.json").string() << ")\n";
    return res.report.passed() ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral Galerkin diagnostics for the stochastic Navier-Stokes system"};
    app.require_subcommand(1);
    std::string config;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config, "key = value config file")->required();
    auto* list = app.add_subcommand("list", "List registered experiments");
    auto* validate = app.add_subcommand("validate", "Check a config file without running it");
    validate->add_option("config", config, "key = value config file")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        apply_worker_env();
        if (*list) return cmd_list();
        if (*validate) return cmd_validate(config);
        return cmd_run(config);
    } catch (const sns::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kInvalidConfig;
    } catch (const sns::BlowUpError& e) {
        std::cerr << "numerical blow-up: " << e.what() << "\n";
        return kBlowUp;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
}
