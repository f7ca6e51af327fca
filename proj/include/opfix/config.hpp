#pragma once

// Experiment configuration: a strict JSON schema covering the operator
// recipe, update model, noise model, optional drift, run settings, requested
// bound curves, and output settings. Unknown keys are errors, and every
// message cites the JSON path of the offending key.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "opfix/bounds.hpp"

namespace opfix {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

struct OutputSettings {
    std::string directory = "out";
    long stride = 1;      // keep every stride-th iteration in trajectory output
    long csv_trials = 3;  // trials written to trajectories.csv
};

struct Experiment {
    IterationConfig iteration;
    long trials = 1000;
    std::uint64_t base_seed = 1;
    std::vector<CurveRequest> requests;
    OutputSettings output;

    std::string canonical_json;   // normalized config dump
    std::uint64_t config_digest = 0;  // FNV-1a of canonical_json
};

/// Parses an already-loaded JSON document. Throws ConfigError.
Experiment parse_experiment(const nlohmann::json& root);

/// Reads and parses a config file. JSON syntax errors are reported with the
/// parser's byte position; schema errors with their JSON path.
Experiment load_experiment(const std::string& path);

}  // namespace opfix
