#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sns/noise.hpp"
#include "sns/solver.hpp"
#include "sns/spectrum.hpp"

namespace sns {

/// Invalid configuration; the message starts with the offending "section.key".
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    std::string name;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir;

    Backend backend = Backend::Torus;
    std::size_t n = 32;
    std::vector<std::size_t> levels;
    double slope = 1.0;  // synthetic backend: lambda_k = slope * k
    std::filesystem::path cache_dir;

    ColoringSpec coloring;
    SolverConfig solver;
    double cutoff_R = 5.0;

    std::size_t M = 1000;
    double burn_in = 0.0;
    std::size_t thinning = 1;

    /// Throws ConfigError naming the field.
    void validate() const;
    /// Stable "section.key = value" listing of every field; identical configs give identical text.
    std::string canonical() const;
    std::uint64_t hash() const;

    Spectrum spectrum(std::size_t modes) const;
    Coloring make_coloring_for(const Spectrum& s) const;
};

/// Parses key = value sections. `defaults` supplies the starting point for the experiment named
/// in [experiment] name; every key present then overrides it. Unknown sections or keys, malformed
/// numbers and failed invariants raise ConfigError.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig (*defaults)(const std::string& name));
ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentConfig (*defaults)(const std::string& name));

/// FNV-1a 64 over bytes.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace sns
