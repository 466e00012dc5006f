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
#include <vector>

#include "mimoadv/channel.hpp"
#include "mimoadv/oracle.hpp"
#include "mimoadv/scenario.hpp"

namespace mimoadv {

inline constexpr std::uint32_t kDatasetSchemaVersion = 1;

/// One network realization: 2KL user coordinates and, for each cell, the
/// K optimal powers followed by their sum (all in mW).
struct Sample {
  std::vector<double> positions;
  std::vector<double> labels;
};

struct Dataset {
  std::uint64_t config_hash = 0;
  Precoder precoder = Precoder::kMr;
  int num_cells = 0;
  int users_per_cell = 0;
  std::vector<Sample> samples;

  int input_dim() const { return 2 * num_cells * users_per_cell; }
  int label_dim() const { return users_per_cell + 1; }
};

struct DatasetOptions {
  Precoder precoder = Precoder::kMr;
  /// Monte-Carlo draws per sample for M-MMSE gains (MR uses closed forms).
  std::uint32_t mc_draws = 5000;
  SolverParams solver;
  int threads = 1;
  /// Resamples allowed per record before giving up.
  int max_resamples = 20;
};

struct DatasetStats {
  std::size_t resampled = 0;
  std::size_t mc_resampled_draws = 0;
  std::size_t mc_clipped_entries = 0;
};

/// Labels `count` random drops with the max-product oracle. Record n uses
/// RNG streams derived from (config.rng_seed, n), so the output is the same
/// for any thread count. Drops whose solve does not converge are replaced.
Dataset make_dataset(const NetworkConfig& config, std::size_t count, const DatasetOptions& options,
                     DatasetStats* stats = nullptr);

/// Gains for one drop under the dataset's precoder and CSI settings.
GainTable gains_for_drop(const NetworkConfig& config, const CellLayout& layout,
                         const UePositions& users, Precoder precoder, std::uint32_t mc_draws,
                         std::uint64_t seed, std::uint64_t index);

/// Binary layout (little-endian): magic "MADVDSET", u32 schema_version,
/// u64 config hash, u32 precoder, u64 N, u32 K, u32 L, then N records of
/// 2KL input f64 followed by L*(K+1) label f64.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Header line then one row per sample: x0..x{2KL-1}, then rho_j_k and sum_j.
void export_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace mimoadv
