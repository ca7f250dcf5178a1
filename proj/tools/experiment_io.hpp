#pragma once

// JSON experiment files, run manifests and CSV output for the command line tool.

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dpinn/metrics.hpp"
#include "dpinn/train.hpp"

namespace dpinn::io {

using nlohmann::json;

inline constexpr const char* artifact_version = "1.0.0";

struct UqOptions {
    int samples = 1024;
    int nx = 101;
    int nt = 11;
};

/// Everything one experiment file describes.
struct ExperimentFile {
    ExperimentConfig config;
    HyperGrid grid;
    VerifyOptions verify;
    UqOptions uq;
};

/// Throws std::invalid_argument naming the offending key.
ExperimentFile parse_experiment(const json& j);
/// Throws std::runtime_error naming the path if it cannot be read.
ExperimentFile load_experiment(const std::string& path);
/// Fully resolved form; parse_experiment(to_json(f)) reproduces f.
json to_json(const ExperimentFile& f);

struct RunManifest {
    std::string experiment;
    std::string command;
    json config;
    std::vector<std::uint64_t> seeds;
    double wall_seconds = 0.0;
    double seconds_per_iteration = 0.0;
    std::map<std::string, std::string> outputs;
    json results;
    std::string version = artifact_version;

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

json to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);

void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

/// Writes a header row and rows of numbers with round-trip precision.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace dpinn::io
