// Copyright 2026 The mimoadv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mimoadv/channel.hpp"
#include "mimoadv/dataset.hpp"
#include "mimoadv/eval.hpp"
#include "mimoadv/nn.hpp"
#include "mimoadv/scenario.hpp"

// End-to-end commands shared by the CLI and the integration tests. Every
// command writes its artifacts plus a manifest listing their digests.
namespace mimoadv::pipeline {

inline constexpr std::uint32_t kManifestSchemaVersion = 1;

struct GenerateOptions {
  NetworkConfig config;
  std::size_t samples = 1000;
  DatasetOptions dataset;
  std::filesystem::path output;
  bool csv = false;
};

struct GenerateResult {
  std::filesystem::path dataset;
  DatasetStats stats;
};

GenerateResult generate(const GenerateOptions& options);

struct TrainOptions {
  NetworkConfig config;
  std::filesystem::path dataset;
  ModelId model = ModelId::kModel1;
  /// Cell to train, or nullopt for every cell.
  std::optional<int> cell;
  TrainParams params;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir;
  int threads = 1;
  /// Use at most this many dataset records (0 = all).
  std::size_t max_samples = 0;
};

struct TrainResult {
  std::vector<std::filesystem::path> models;
  std::vector<TrainReport> reports;
};

/// Throws ValidationError when the dataset does not match `config`.
TrainResult train(const TrainOptions& options);

/// Standard file name of the model trained for one cell.
std::string model_file_name(ModelId id, int cell);

/// Loads model_file_name(id, j) for every cell of `config` from `dir` and
/// checks each against the config hash. If `id` is kCustom the first
/// matching file per cell is used.
ModelSet load_model_set(const std::filesystem::path& dir, const NetworkConfig& config,
                        ModelId id = ModelId::kCustom);

struct EvalOptions {
  NetworkConfig config;
  ExperimentSpec spec;
  /// White-box models; for black-box the surrogate.
  std::filesystem::path models;
  ModelId model = ModelId::kCustom;
  /// Set for black-box runs.
  std::optional<std::filesystem::path> victim;
  ModelId victim_model = ModelId::kCustom;
  std::filesystem::path run_dir;
  /// Also write the per-record attack CSV.
  bool write_records = false;
  std::size_t max_candidates = 1'000'000;
};

struct EvalResult {
  SuccessRateTable table;
  std::filesystem::path rates_csv;
  std::filesystem::path summary_json;
  std::size_t candidates_drawn = 0;
};

/// White-box writes rates_whitebox.csv, black-box rates_blackbox.csv; both
/// update summary.json in the run directory.
EvalResult evaluate(const EvalOptions& options);

/// Writes plot_rates.script for whichever rates CSVs exist in `run_dir`.
std::filesystem::path report(const std::filesystem::path& run_dir);

/// Appends or replaces the manifest entry for `command` in
/// <run_dir or output dir>/manifest.json.
struct ManifestEntry {
  std::string command;
  std::uint64_t config_hash = 0;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  double wall_seconds = 0.0;
};
void write_manifest(const std::filesystem::path& manifest_path, const ManifestEntry& entry);

}  // namespace mimoadv::pipeline
