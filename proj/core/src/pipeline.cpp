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

#include "mimoadv/pipeline.hpp"

#include <chrono>
#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mimoadv/digest.hpp"
#include "mimoadv/errors.hpp"
#include "mimoadv/parallel.hpp"

namespace mimoadv::pipeline {
namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Json read_json_or_empty(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return Json::object();
  std::ifstream in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void check_model(const MlpModel& m, const NetworkConfig& config, const std::filesystem::path& path) {
  if (m.meta().config_hash != config_hash(config)) {
    throw ValidationError(path.string() + ": model was trained for config " + hex64(m.meta().config_hash) +
                          ", current config is " + hex64(config_hash(config)));
  }
  if (m.input_dim() != config.input_dim() || users_of(m) != config.users_per_cell) {
    throw ValidationError(path.string() + ": model dimensions do not match the config");
  }
}

Json spec_json(const ExperimentSpec& spec) {
  Json methods = Json::array();
  for (AttackMethod m : spec.methods) methods.push_back(to_string(m));
  return {{"methods", methods},
          {"epsilons", spec.epsilons},
          {"n_test", spec.n_test},
          {"seed", spec.seed},
          {"pgd_step", spec.attack.pgd_step},
          {"pgd_iterations", spec.attack.pgd_iterations},
          {"momentum", spec.attack.momentum},
          {"mi_iterations", spec.attack.mi_iterations},
          {"clamp_to_cells", spec.attack.clamp_to_cells}};
}

Json aggregate_json(const SuccessRateTable& table) {
  Json out = Json::object();
  for (const RateEntry& e : table.entries) {
    if (e.cell != -1) continue;
    std::ostringstream key;
    key << e.epsilon;
    out[to_string(e.method)][key.str()] = e.rate();
  }
  return out;
}

}  // namespace

GenerateResult generate(const GenerateOptions& options) {
  const auto t0 = Clock::now();
  options.config.validate();
  if (options.samples == 0) throw ValidationError("generate: sample count must be > 0");
  GenerateResult result;
  const Dataset ds = make_dataset(options.config, options.samples, options.dataset, &result.stats);
  if (options.output.has_parent_path()) std::filesystem::create_directories(options.output.parent_path());
  save_dataset(ds, options.output);
  result.dataset = options.output;
  ManifestEntry entry;
  entry.command = "generate";
  entry.config_hash = ds.config_hash;
  entry.seeds = {{"rng_seed", options.config.rng_seed}};
  entry.outputs = {options.output};
  if (options.csv) {
    std::filesystem::path csv = options.output;
    csv.replace_extension(".csv");
    export_dataset_csv(ds, csv);
    entry.outputs.push_back(csv);
  }
  entry.wall_seconds = seconds_since(t0);
  std::filesystem::path manifest = options.output;
  manifest += ".manifest.json";
  write_manifest(manifest, entry);
  return result;
}

std::string model_file_name(ModelId id, int cell) {
  return to_string(id) + "_cell" + std::to_string(cell) + ".bin";
}

TrainResult train(const TrainOptions& options) {
  const auto t0 = Clock::now();
  const NetworkConfig& config = options.config;
  config.validate();
  const Dataset ds = load_dataset(options.dataset);
  if (ds.num_cells != config.num_cells() || ds.users_per_cell != config.users_per_cell) {
    throw ValidationError("train: dataset has L=" + std::to_string(ds.num_cells) + ", K=" +
                          std::to_string(ds.users_per_cell) + " but the config has L=" +
                          std::to_string(config.num_cells()) + ", K=" + std::to_string(config.users_per_cell));
  }
  if (ds.config_hash != config_hash(config)) {
    throw ValidationError("train: dataset config hash " + hex64(ds.config_hash) +
                          " does not match the current config " + hex64(config_hash(config)));
  }
  if (options.model == ModelId::kCustom) throw ValidationError("train: choose model1 or model2");
  std::vector<int> cells;
  if (options.cell) {
    if (*options.cell < 0 || *options.cell >= config.num_cells()) {
      throw ValidationError("train: cell index out of range");
    }
    cells.push_back(*options.cell);
  } else {
    for (int j = 0; j < config.num_cells(); ++j) cells.push_back(j);
  }

  const std::size_t n = options.max_samples == 0 ? ds.samples.size()
                                                  : std::min(options.max_samples, ds.samples.size());
  const int K = ds.users_per_cell;
  Eigen::MatrixXd inputs(ds.input_dim(), static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    inputs.col(static_cast<Eigen::Index>(s)) =
        Eigen::Map<const Eigen::VectorXd>(ds.samples[s].positions.data(), ds.input_dim());
  }
  std::filesystem::create_directories(options.output_dir);

  TrainResult result;
  result.models.resize(cells.size());
  result.reports.resize(cells.size());
  parallel_for(cells.size(), options.threads, [&](std::size_t c) {
    const int j = cells[c];
    Eigen::MatrixXd targets(K + 1, static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s) {
      for (int k = 0; k <= K; ++k) {
        targets(k, static_cast<Eigen::Index>(s)) =
            ds.samples[s].labels[static_cast<std::size_t>(j * (K + 1) + k)] / config.p_max_mw;
      }
    }
    ModelMeta meta;
    meta.precoder = ds.precoder;
    meta.config_hash = ds.config_hash;
    meta.cell = j;
    meta.output_scale = config.p_max_mw;
    MlpModel model = MlpModel::architecture(options.model, K, ds.num_cells, meta);
    const std::uint64_t seed = derive_seed(options.seed, StreamKind::kTraining,
                                           static_cast<std::uint64_t>(options.model),
                                           static_cast<std::uint64_t>(j));
    result.reports[c] = mimoadv::train(model, inputs, targets, options.params, seed);
    const std::filesystem::path path = options.output_dir / model_file_name(options.model, j);
    save_model(model, path);
    result.models[c] = path;
  });

  ManifestEntry entry;
  entry.command = "train_" + to_string(options.model);
  entry.config_hash = ds.config_hash;
  entry.seeds = {{"train_seed", options.seed}};
  entry.inputs = {options.dataset};
  entry.outputs = result.models;
  entry.wall_seconds = seconds_since(t0);
  write_manifest(options.output_dir / "manifest.json", entry);
  return result;
}

ModelSet load_model_set(const std::filesystem::path& dir, const NetworkConfig& config, ModelId id) {
  ModelSet set;
  for (int j = 0; j < config.num_cells(); ++j) {
    std::filesystem::path path;
    if (id != ModelId::kCustom) {
      path = dir / model_file_name(id, j);
    } else {
      for (ModelId candidate : {ModelId::kModel1, ModelId::kModel2}) {
        if (std::filesystem::exists(dir / model_file_name(candidate, j))) {
          path = dir / model_file_name(candidate, j);
          break;
        }
      }
    }
    if (path.empty() || !std::filesystem::exists(path)) {
      throw ValidationError("no model for cell " + std::to_string(j) + " in " + dir.string());
    }
    MlpModel m = load_model(path);
    check_model(m, config, path);
    if (m.meta().cell != j) throw ValidationError(path.string() + ": model was trained for another cell");
    set.per_cell.push_back(std::move(m));
  }
  return set;
}

EvalResult evaluate(const EvalOptions& options) {
  const auto t0 = Clock::now();
  options.config.validate();
  options.spec.validate();
  const ModelSet primary = load_model_set(options.models, options.config, options.model);
  std::optional<ModelSet> victim;
  if (options.victim) {
    victim = load_model_set(*options.victim, options.config, options.victim_model);
    if (victim->per_cell.front().meta().precoder != primary.per_cell.front().meta().precoder) {
      throw ValidationError("evaluate: surrogate and victim were trained on different precoders");
    }
  }
  std::vector<std::vector<ForwardOnlyModel>> judges = {primary.forward_only()};
  if (victim) judges.push_back(victim->forward_only());
  const CleanTestSet test = draw_clean_test_set(options.config, judges, options.spec.n_test,
                                                options.spec.seed, options.max_candidates,
                                                options.spec.threads);

  std::filesystem::create_directories(options.run_dir);
  const CellLayout layout = build_geometry(options.config);
  const std::vector<ForwardOnlyModel> judge = victim ? victim->forward_only() : primary.forward_only();
  const AttackReport report = run_attacks(primary, judge, test.inputs, options.spec, &layout);

  EvalResult result;
  result.table = aggregate(report, options.spec, options.config.num_cells());
  result.candidates_drawn = test.candidates_drawn;
  const std::string mode = victim ? "blackbox" : "whitebox";
  result.rates_csv = options.run_dir / ("rates_" + mode + ".csv");
  write_rates_csv(result.table, result.rates_csv);

  ManifestEntry entry;
  entry.command = "eval_" + mode;
  entry.config_hash = config_hash(options.config);
  entry.seeds = {{"experiment_seed", options.spec.seed}};
  for (const MlpModel& m : primary.per_cell) entry.seeds.emplace_back("model_seed", m.meta().seed);
  entry.inputs.push_back(options.models);
  if (options.victim) entry.inputs.push_back(*options.victim);
  entry.outputs.push_back(result.rates_csv);
  if (options.write_records) {
    const std::filesystem::path records = options.run_dir / ("attacks_" + mode + ".csv");
    write_attack_report_csv(report, records);
    entry.outputs.push_back(records);
  }

  result.summary_json = options.run_dir / "summary.json";
  Json summary = read_json_or_empty(result.summary_json);
  summary["schema_version"] = kManifestSchemaVersion;
  summary["config_hash"] = hex64(config_hash(options.config));
  summary[mode] = {
      {"precoder", to_string(primary.per_cell.front().meta().precoder)},
      {"attacked_model", to_string(primary.per_cell.front().meta().id)},
      {"judge_model", to_string((victim ? victim->per_cell : primary.per_cell).front().meta().id)},
      {"spec", spec_json(options.spec)},
      {"clean_candidates_drawn", test.candidates_drawn},
      {"clean_samples", test.inputs.size()},
      {"aggregate_rates", aggregate_json(result.table)},
      {"rates", Json::parse(rates_to_json_text(result.table))}};
  write_json(result.summary_json, summary);
  entry.outputs.push_back(result.summary_json);
  entry.wall_seconds = seconds_since(t0);
  write_manifest(options.run_dir / "manifest.json", entry);
  return result;
}

std::filesystem::path report(const std::filesystem::path& run_dir) {
  const auto t0 = Clock::now();
  std::vector<std::string> files;
  const std::filesystem::path summary_path = run_dir / "summary.json";
  Json summary = read_json_or_empty(summary_path);
  ManifestEntry entry;
  entry.command = "report";
  for (const char* mode : {"whitebox", "blackbox"}) {
    const std::string name = std::string("rates_") + mode + ".csv";
    if (!std::filesystem::exists(run_dir / name)) continue;
    files.push_back(name);
    entry.inputs.push_back(run_dir / name);
    const SuccessRateTable table = read_rates_csv(run_dir / name);
    summary[mode]["aggregate_rates"] = aggregate_json(table);
    summary[mode]["rates"] = Json::parse(rates_to_json_text(table));
  }
  if (files.empty()) throw ValidationError("report: no rates CSV found in " + run_dir.string());
  summary["schema_version"] = kManifestSchemaVersion;
  write_json(summary_path, summary);
  const std::filesystem::path script = run_dir / "plot_rates.script";
  write_plot_script(files, script);
  entry.outputs = {summary_path, script};
  entry.wall_seconds = seconds_since(t0);
  write_manifest(run_dir / "manifest.json", entry);
  return script;
}

void write_manifest(const std::filesystem::path& manifest_path, const ManifestEntry& entry) {
  Json manifest = read_json_or_empty(manifest_path);
  manifest["schema_version"] = kManifestSchemaVersion;
  Json seeds = Json::array();
  for (const auto& [name, value] : entry.seeds) seeds.push_back({{"name", name}, {"value", value}});
  auto digests = [](const std::vector<std::filesystem::path>& paths) {
    Json out = Json::array();
    for (const auto& p : paths) {
      if (std::filesystem::is_regular_file(p)) {
        out.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
      } else if (std::filesystem::is_directory(p)) {
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(p))
          if (e.is_regular_file() && e.path().extension() == ".bin") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out.push_back({{"path", f.string()}, {"sha256", sha256_file(f)}});
      }
    }
    return out;
  };
  manifest["commands"][entry.command] = {{"config_hash", hex64(entry.config_hash)},
                                         {"seeds", seeds},
                                         {"inputs", digests(entry.inputs)},
                                         {"outputs", digests(entry.outputs)},
                                         {"wall_seconds", entry.wall_seconds}};
  write_json(manifest_path, manifest);
}

}  // namespace mimoadv::pipeline
