#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sns/ergodicity.hpp"
#include "sns/noise.hpp"

namespace sns {

/// Writes plot-ready CSV and JSON under one directory and keeps track of everything written, so
/// the manifest can list sizes and content hashes. Output carries no timestamps or host data.
class ArtifactWriter {
  public:
    explicit ArtifactWriter(std::filesystem::path dir, std::uint64_t config_hash = 0);

    const std::filesystem::path& dir() const { return dir_; }

    void write_text(const std::string& name, const std::string& body);
    void write_json(const std::string& name, const nlohmann::json& j);
    /// Doubles printed with 17 significant digits.
    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);
    /// Columns t, c0 .. c{n-1}; a JSON sidecar `<name>.json` holds seed, trajectory and shape.
    void write_path(const std::string& name, const PathSample& path);
    void write_histogram(const std::string& name, const std::vector<double>& edges,
                         const std::vector<std::size_t>& counts);

    /// Buffered into estimates.json at finish().
    void record_estimate(const std::string& estimator, const Estimate& e, std::uint64_t seed);

    /// Writes estimates.json (if any) and manifest.json; returns the manifest.
    nlohmann::json finish();

  private:
    std::filesystem::path dir_;
    std::uint64_t config_hash_;
    std::map<std::string, std::string> files_;  // name -> bytes written
    nlohmann::json estimates_ = nlohmann::json::array();
};

std::string format_double(double v);
std::string hex64(std::uint64_t v);

}  // namespace sns
