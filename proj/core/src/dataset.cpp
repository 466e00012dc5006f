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

#include "mimoadv/dataset.hpp"

#include <atomic>
#include <fstream>

#include "mimoadv/binary_io.hpp"
#include "mimoadv/errors.hpp"
#include "mimoadv/parallel.hpp"

namespace mimoadv {
namespace {

constexpr std::string_view kDatasetMagic = "MADVDSET";

// Sums the K powers of each cell and, if rounding pushed a sum past P_max,
// scales that cell down so the label is feasible exactly.
std::vector<double> make_labels(const PowerAllocation& power, double p_max) {
  const int L = power.num_cells;
  const int K = power.users_per_cell;
  std::vector<double> labels;
  labels.reserve(static_cast<std::size_t>(L * (K + 1)));
  for (int j = 0; j < L; ++j) {
    std::vector<double> cell(static_cast<std::size_t>(K));
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += cell[static_cast<std::size_t>(k)] = power(j, k);
    while (sum > p_max) {
      const double shrink = p_max / sum * (1.0 - 1e-15);
      sum = 0.0;
      for (double& v : cell) sum += v *= shrink;
    }
    labels.insert(labels.end(), cell.begin(), cell.end());
    labels.push_back(sum);
  }
  return labels;
}

}  // namespace

GainTable gains_for_drop(const NetworkConfig& config, const CellLayout& layout,
                         const UePositions& users, Precoder precoder, std::uint32_t mc_draws,
                         std::uint64_t seed, std::uint64_t index) {
  Rng shadow = make_rng(seed, StreamKind::kShadowing, index);
  const LargeScaleFading fading = compute_fading(config, layout, users, &shadow);
  if (precoder == Precoder::kMr) return mr_gains_closed_form(fading, config);
  MonteCarloOptions mc;
  mc.num_draws = mc_draws;
  mc.seed = derive_seed(seed, StreamKind::kChannelDraws, index);
  mc.threads = 1;
  return monte_carlo_gains(fading, config, precoder, mc);
}

Dataset make_dataset(const NetworkConfig& config, std::size_t count, const DatasetOptions& options,
                     DatasetStats* stats) {
  config.validate();
  const CellLayout layout = build_geometry(config);
  Dataset ds;
  ds.config_hash = config_hash(config);
  ds.precoder = options.precoder;
  ds.num_cells = config.num_cells();
  ds.users_per_cell = config.users_per_cell;
  ds.samples.resize(count);

  std::atomic<std::size_t> resampled{0}, mc_resampled{0}, mc_clipped{0};
  parallel_for(count, options.threads, [&](std::size_t n) {
    for (int attempt = 0; attempt <= options.max_resamples; ++attempt) {
      // Attempt a of record n gets its own stream index, so a replaced record
      // never perturbs its neighbours.
      const std::uint64_t index = (static_cast<std::uint64_t>(n) << 8) | static_cast<std::uint64_t>(attempt);
      Rng drop_rng = make_rng(config.rng_seed, StreamKind::kUserDrop, index);
      UePositions users = drop_users(config, layout, drop_rng);
      const GainTable gains =
          gains_for_drop(config, layout, users, options.precoder, options.mc_draws, config.rng_seed, index);
      mc_resampled += gains.resampled_draws;
      mc_clipped += gains.clipped_entries;
      const SolveResult solved = solve_max_product(gains, config, options.solver);
      if (!solved.converged) {
        ++resampled;
        continue;
      }
      ds.samples[n].positions = std::move(users.coords);
      ds.samples[n].labels = make_labels(solved.power, config.p_max_mw);
      return;
    }
    throw SamplingError("make_dataset: record " + std::to_string(n) + " did not converge after " +
                        std::to_string(options.max_resamples) + " resamples");
  });
  if (stats) {
    stats->resampled = resampled;
    stats->mc_resampled_draws = mc_resampled;
    stats->mc_clipped_entries = mc_clipped;
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  BinaryWriter w(out);
  w.magic(kDatasetMagic);
  w.u32(kDatasetSchemaVersion);
  w.u64(ds.config_hash);
  w.u32(static_cast<std::uint32_t>(ds.precoder));
  w.u64(ds.samples.size());
  w.u32(static_cast<std::uint32_t>(ds.users_per_cell));
  w.u32(static_cast<std::uint32_t>(ds.num_cells));
  const std::size_t in_dim = static_cast<std::size_t>(ds.input_dim());
  const std::size_t out_dim = static_cast<std::size_t>(ds.num_cells * ds.label_dim());
  for (const Sample& s : ds.samples) {
    if (s.positions.size() != in_dim || s.labels.size() != out_dim) {
      throw ValidationError("save_dataset: record has wrong dimensions");
    }
    w.f64s(s.positions);
    w.f64s(s.labels);
  }
  if (!out) throw Error("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  BinaryReader r(in, path.string());
  r.expect_magic(kDatasetMagic);
  const std::uint32_t version = r.u32();
  if (version != kDatasetSchemaVersion) {
    throw VersionError(path.string() + ": dataset schema " + std::to_string(version) + " (expected " +
                       std::to_string(kDatasetSchemaVersion) + ")");
  }
  Dataset ds;
  ds.config_hash = r.u64();
  const std::uint32_t precoder = r.u32();
  if (precoder > 1) throw FormatError(path.string() + ": bad precoder field");
  ds.precoder = static_cast<Precoder>(precoder);
  const std::uint64_t n = r.u64();
  ds.users_per_cell = static_cast<int>(r.u32());
  ds.num_cells = static_cast<int>(r.u32());
  if (ds.users_per_cell < 1 || ds.num_cells < 1 || ds.users_per_cell > 4096 || ds.num_cells > 4096) {
    throw FormatError(path.string() + ": bad dimensions");
  }
  const std::size_t in_dim = static_cast<std::size_t>(ds.input_dim());
  const std::size_t out_dim = static_cast<std::size_t>(ds.num_cells * ds.label_dim());
  // Check the declared record count against the file size before allocating.
  const auto header_end = in.tellg();
  in.seekg(0, std::ios::end);
  const auto file_end = in.tellg();
  in.seekg(header_end);
  const std::uint64_t payload = static_cast<std::uint64_t>(file_end - header_end);
  if (payload != n * (in_dim + out_dim) * sizeof(double)) {
    throw FormatError(path.string() + ": payload size does not match header (truncated or corrupt)");
  }
  ds.samples.resize(n);
  for (Sample& s : ds.samples) {
    s.positions = r.f64s(in_dim);
    s.labels = r.f64s(out_dim);
  }
  r.expect_end();
  return ds;
}

void export_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  const int K = ds.users_per_cell;
  for (int i = 0; i < ds.input_dim(); ++i) out << (i ? "," : "") << 'x' << i;
  for (int j = 0; j < ds.num_cells; ++j) {
    for (int k = 0; k < K; ++k) out << ",rho_" << j << '_' << k;
    out << ",sum_" << j;
  }
  out << '\n';
  for (const Sample& s : ds.samples) {
    for (std::size_t i = 0; i < s.positions.size(); ++i) out << (i ? "," : "") << s.positions[i];
    for (double v : s.labels) out << ',' << v;
    out << '\n';
  }
}

}  // namespace mimoadv
