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

#include "mimoadv/attacks.hpp"
#include "mimoadv/nn.hpp"
#include "mimoadv/scenario.hpp"

namespace mimoadv {

/// One trained model per cell, index = cell.
struct ModelSet {
  std::vector<MlpModel> per_cell;

  int num_cells() const { return static_cast<int>(per_cell.size()); }
  std::vector<ForwardOnlyModel> forward_only() const;
};

struct ExperimentSpec {
  std::vector<AttackMethod> methods = {AttackMethod::kFgsm, AttackMethod::kMiFgsm,
                                       AttackMethod::kPgd, AttackMethod::kRandom};
  std::vector<double> epsilons = {0.3, 0.4};
  std::size_t n_test = 500;
  std::uint64_t seed = 1;
  /// Template for per-method settings; method and epsilon are overwritten.
  AttackConfig attack;
  int threads = 1;

  void validate() const;
};

/// Keeps the inputs for which every cell of every judge predicts a
/// feasible power vector.
std::vector<std::vector<double>> filter_clean_feasible(
    const std::vector<std::vector<ForwardOnlyModel>>& judges,
    const std::vector<std::vector<double>>& candidates);

struct CleanTestSet {
  std::vector<std::vector<double>> inputs;
  std::size_t candidates_drawn = 0;
};

/// Draws fresh user drops until n_test of them survive filter_clean_feasible.
/// Throws SamplingError after `max_candidates` candidates.
CleanTestSet draw_clean_test_set(const NetworkConfig& config,
                                 const std::vector<std::vector<ForwardOnlyModel>>& judges,
                                 std::size_t n_test, std::uint64_t seed,
                                 std::size_t max_candidates = 1'000'000, int threads = 1);

struct AttackRecord {
  std::size_t sample = 0;
  int cell = 0;
  AttackMethod method = AttackMethod::kFgsm;
  double epsilon = 0.0;
  double clean_sum = 0.0;
  double adversarial_sum = 0.0;
  bool feasible = true;
  double linf = 0.0;
};

struct AttackReport {
  std::vector<AttackRecord> records;
};

/// cell == -1 is the aggregate over all cells (pooled sample x cell pairs).
struct RateEntry {
  int cell = -1;
  AttackMethod method = AttackMethod::kFgsm;
  double epsilon = 0.0;
  std::size_t successes = 0;
  std::size_t trials = 0;

  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / trials; }
  double std_error() const;
};

struct SuccessRateTable {
  int num_cells = 0;
  std::vector<RateEntry> entries;

  /// Throws std::out_of_range if the entry is missing.
  const RateEntry& at(int cell, AttackMethod method, double epsilon) const;
  double rate(int cell, AttackMethod method, double epsilon) const {
    return at(cell, method, epsilon).rate();
  }
};

/// Crafts on `gradient_models[j]` and judges on `judges[j]` for every
/// (method, epsilon, cell, sample).
AttackReport run_attacks(const ModelSet& gradient_models, const std::vector<ForwardOnlyModel>& judges,
                         const std::vector<std::vector<double>>& inputs, const ExperimentSpec& spec,
                         const CellLayout* layout = nullptr);

/// Pure aggregation: rows ordered by epsilon, method (spec order), then
/// cell 0..L-1 and the aggregate last.
SuccessRateTable aggregate(const AttackReport& report, const ExperimentSpec& spec, int num_cells);

SuccessRateTable run_whitebox(const ModelSet& models, const std::vector<std::vector<double>>& inputs,
                              const ExperimentSpec& spec, AttackReport* report = nullptr);

/// Gradients come from `surrogate` only; feasibility is judged on `victim`.
SuccessRateTable run_blackbox(const ModelSet& surrogate, const std::vector<ForwardOnlyModel>& victim,
                              const std::vector<std::vector<double>>& inputs,
                              const ExperimentSpec& spec, AttackReport* report = nullptr);

/// Columns: cell,method,epsilon,successes,trials,rate,std_error. cell is "all"
/// for the aggregate row.
void write_rates_csv(const SuccessRateTable& table, const std::filesystem::path& path);
SuccessRateTable read_rates_csv(const std::filesystem::path& path);

/// Columns: sample,cell,method,epsilon,clean_sum_mw,adv_sum_mw,feasible,linf.
void write_attack_report_csv(const AttackReport& report, const std::filesystem::path& path);

/// Gnuplot script drawing grouped bars (one cluster per epsilon and cell)
/// for every rates CSV in the run directory.
void write_plot_script(const std::vector<std::string>& rates_files, const std::filesystem::path& path);

std::string rates_to_json_text(const SuccessRateTable& table);

}  // namespace mimoadv
