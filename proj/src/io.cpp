#include "sns/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sns/config.hpp"

namespace sns {

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir, std::uint64_t config_hash)
    : dir_(std::move(dir)), config_hash_(config_hash)
{
    std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write_text(const std::string& name, const std::string& body)
{
    if (name.empty() || name.find('/') != std::string::npos || name == "manifest.json")
        throw std::invalid_argument("artifact name '" + name + "' is not allowed");
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << body;
    if (!out) throw std::runtime_error("write failed: " + (dir_ / name).string());
    files_[name] = body;
}

void ArtifactWriter::write_json(const std::string& name, const nlohmann::json& j) { write_text(name, j.dump(2) + "\n"); }

void ArtifactWriter::write_csv(const std::string& name, const std::vector<std::string>& header,
                               const std::vector<std::vector<double>>& rows)
{
    std::string body;
    for (std::size_t i = 0; i < header.size(); ++i) body += (i ? "," : "") + header[i];
    body += "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw std::invalid_argument(name + ": row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) body += (i ? "," : "") + format_double(row[i]);
        body += "\n";
    }
    write_text(name, body);
}

void ArtifactWriter::write_path(const std::string& name, const PathSample& path)
{
    path.validate();
    std::vector<std::string> header{"t"};
    for (std::size_t k = 0; k < path.dim(); ++k) header.push_back("c" + std::to_string(k));
    std::vector<std::vector<double>> rows;
    rows.reserve(path.size());
    for (std::size_t m = 0; m < path.size(); ++m) {
        std::vector<double> row{path.times[m]};
        row.insert(row.end(), path.fields[m].begin(), path.fields[m].end());
        rows.push_back(std::move(row));
    }
    write_csv(name, header, rows);
    write_json(name + ".json", {{"seed", path.seed},
                                {"trajectory", path.trajectory},
                                {"points", path.size()},
                                {"dim", path.dim()}});
}

void ArtifactWriter::write_histogram(const std::string& name, const std::vector<double>& edges,
                                     const std::vector<std::size_t>& counts)
{
    if (edges.size() != counts.size() + 1) throw std::invalid_argument(name + ": need one more edge than counts");
    std::vector<std::vector<double>> rows;
    for (std::size_t b = 0; b < counts.size(); ++b)
        rows.push_back({edges[b], edges[b + 1], static_cast<double>(counts[b])});
    write_csv(name, {"lo", "hi", "count"}, rows);
}

void ArtifactWriter::record_estimate(const std::string& estimator, const Estimate& e, std::uint64_t seed)
{
    estimates_.push_back({{"estimator", estimator},
                          {"config_hash", hex64(config_hash_)},
                          {"value", e.mean},
                          {"stderr", e.stderr_},
                          {"M", e.M},
                          {"seed", seed}});
}

nlohmann::json ArtifactWriter::finish()
{
    if (!estimates_.empty()) write_json("estimates.json", estimates_);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, bytes] : files_)
        files.push_back({{"name", name}, {"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}});
    nlohmann::json manifest{{"config_hash", hex64(config_hash_)}, {"files", files}};
    std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write manifest in " + dir_.string());
    return manifest;
}

}  // namespace sns
