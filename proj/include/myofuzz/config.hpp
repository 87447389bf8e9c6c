#pragma once

// JSON run configuration shared by the command-line tools.
//
//   {
//     "seed": 7,
//     "out": "runs/exp3",
//     "jobs": 4,
//     "dataset": {"path": "data/s1"}            // or "paths": [...]
//              | {"synthetic": {"num_classes": 4, ...}},
//     "experiment": {"name": "exp3", "membership": "nt", "snr_grid": [0, 12], ...}
//   }
//
// Unknown keys are rejected so that typos do not silently fall back to
// defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "myofuzz/core.hpp"
#include "myofuzz/experiment.hpp"

namespace myofuzz::config {

struct DatasetSource {
  std::vector<std::filesystem::path> paths;
  std::optional<SyntheticSpec> synthetic;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> jobs;
  DatasetSource dataset;
  eval::ExperimentConfig experiment;
};

// Throws ConfigError on syntax errors, unknown keys and wrong types.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& file);

// Canonical JSON of the effective settings (used for manifests).
std::string to_json(const RunConfig& cfg, int indent = 2);

// A directory holding manifest.txt is one subject; otherwise every immediate
// subdirectory holding one is a subject, in name order.
std::vector<SegmentDataset> load_subjects(const std::filesystem::path& root);

// Datasets named by the source; synthetic data uses `seed` unless the spec
// sets its own.
std::vector<SegmentDataset> materialize(const DatasetSource& source, std::uint64_t seed);

}  // namespace myofuzz::config
