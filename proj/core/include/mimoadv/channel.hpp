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

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mimoadv/rng.hpp"
#include "mimoadv/scenario.hpp"

namespace mimoadv {

enum class Precoder { kMr, kMmmse };

std::string to_string(Precoder precoder);
/// Accepts "mr" and "mmmse" (also "m-mmse"). Throws ValidationError otherwise.
Precoder parse_precoder(const std::string& name);

enum class GainEstimator { kClosedForm, kMonteCarlo };

/// Pathloss in dB at `distance_m`. Throws ValidationError below min_distance_m.
double pathloss_db(const NetworkConfig& config, double distance_m);

/// Linear pathloss gain at `distance_m`.
double pathloss(const NetworkConfig& config, double distance_m);

/// beta(l, j, k): linear gain between BS l and user k of cell j.
struct LargeScaleFading {
  int num_cells = 0;
  int users_per_cell = 0;
  std::vector<double> beta;

  double& operator()(int l, int j, int k) { return beta[index(l, j, k)]; }
  double operator()(int l, int j, int k) const { return beta[index(l, j, k)]; }

 private:
  std::size_t index(int l, int j, int k) const {
    return static_cast<std::size_t>((l * num_cells + j) * users_per_cell + k);
  }
};

/// Pathloss (and optional log-normal shadowing) from every BS to every user.
/// `shadowing` may be null when config.shadowing_std_db == 0.
LargeScaleFading compute_fading(const NetworkConfig& config, const CellLayout& layout,
                                const UePositions& users, Rng* shadowing = nullptr);

/// Average channel gains a(j,k) and interference gains b(l,i,j,k) that enter
/// the downlink SINR of user k in cell j. For Monte-Carlo tables the
/// `*_std_error` vectors hold the per-entry standard error of the estimate;
/// closed-form tables leave them at zero.
struct GainTable {
  int num_cells = 0;
  int users_per_cell = 0;
  Precoder precoder = Precoder::kMr;
  GainEstimator estimator = GainEstimator::kClosedForm;
  std::uint32_t num_draws = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> a_std_error;
  std::vector<double> b_std_error;
  // Monte-Carlo bookkeeping.
  std::uint32_t clipped_entries = 0;
  std::uint32_t resampled_draws = 0;

  GainTable() = default;
  GainTable(int cells, int users);

  std::size_t a_index(int j, int k) const {
    return static_cast<std::size_t>(j * users_per_cell + k);
  }
  std::size_t b_index(int l, int i, int j, int k) const {
    return static_cast<std::size_t>(((l * users_per_cell + i) * num_cells + j) * users_per_cell + k);
  }
  double& a_at(int j, int k) { return a[a_index(j, k)]; }
  double a_at(int j, int k) const { return a[a_index(j, k)]; }
  double& b_at(int l, int i, int j, int k) { return b[b_index(l, i, j, k)]; }
  double b_at(int l, int i, int j, int k) const { return b[b_index(l, i, j, k)]; }
};

/// Exact gains for MR precoding under uncorrelated Rayleigh fading, with the
/// precoder normalized to unit average power.
GainTable mr_gains_closed_form(const LargeScaleFading& fading, const NetworkConfig& config);

struct MonteCarloOptions {
  std::uint32_t num_draws = 5000;
  std::uint64_t seed = 1;
  /// Draws per independent RNG substream; also the unit of parallel work.
  std::uint32_t block_size = 250;
  int threads = 1;
};

/// Sample-mean estimates of the average gains for the given precoder.
/// Requires num_draws >= 1000. The result is independent of `threads`.
GainTable monte_carlo_gains(const LargeScaleFading& fading, const NetworkConfig& config,
                            Precoder precoder, const MonteCarloOptions& options);

/// Binary gain file: header {schema_version, config hash, precoder,
/// estimator, num_draws}, then L, K and the a / b tables with their errors.
void save_gain_table(const GainTable& table, std::uint64_t config_hash,
                     const std::filesystem::path& path);
GainTable load_gain_table(const std::filesystem::path& path, std::uint64_t* config_hash = nullptr);

/// One row per entry: kind,l,i,j,k,value,std_error.
void export_gain_table_csv(const GainTable& table, const std::filesystem::path& path);

}  // namespace mimoadv
