#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sns/config.hpp"
#include "sns/io.hpp"

namespace sns {

struct Check {
    std::string name;
    std::string anchor;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ExperimentReport {
    std::string experiment;
    std::vector<Check> checks;
    nlohmann::json info = nlohmann::json::object();

    bool passed() const;
    nlohmann::json to_json() const;
};

enum class RuntimeClass { Instant, Seconds, Minutes };
std::string to_string(RuntimeClass r);

struct ExperimentSpec {
    std::string name;
    std::string anchor;
    RuntimeClass runtime;
    std::string description;
    ExperimentConfig (*defaults)();
    ExperimentReport (*run)(const ExperimentConfig&, ArtifactWriter&);
};

/// Registered diagnostics in a fixed order.
const std::vector<ExperimentSpec>& experiment_registry();
/// Throws ConfigError for unknown names.
const ExperimentSpec& find_experiment(const std::string& name);
ExperimentConfig experiment_defaults(const std::string& name);

struct RunResult {
    ExperimentReport report;
    nlohmann::json manifest;
};

/// Validates, runs and writes config.ini, every artifact, summary.json and manifest.json under
/// cfg.output_dir. BlowUpError and ConfigError propagate.
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace sns
