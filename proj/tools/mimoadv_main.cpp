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

// mimoadv: dataset generation, per-cell training and adversarial evaluation
// of neural power allocation in multi-cell massive MIMO.
//
//   mimoadv [--config FILE] [network flags] <generate|train|attack|eval|report> [flags]
//
// Exit codes: 0 success, 2 usage, 3 validation, 4 runtime.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mimoadv/errors.hpp"
#include "mimoadv/parallel.hpp"
#include "mimoadv/pipeline.hpp"

namespace {

using namespace mimoadv;

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;
constexpr int kConfigSchemaVersion = 1;

struct GlobalOptions {
  NetworkConfig config;
  std::string csi = "pilot_mmse";
  int schema_version = kConfigSchemaVersion;
  int threads = default_thread_count();
  bool deterministic = false;
  std::string run_dir = "run";
};

void add_network_options(CLI::App& app, GlobalOptions& g) {
  NetworkConfig& c = g.config;
  app.add_option("--schema_version,--schema-version", g.schema_version, "Config file schema version");
  app.add_option("--grid-rows,--grid_rows", c.grid_rows, "Cell grid rows")->capture_default_str();
  app.add_option("--grid-cols,--grid_cols", c.grid_cols, "Cell grid columns")->capture_default_str();
  app.add_option("--users-per-cell,--users_per_cell", c.users_per_cell, "Users per cell (K)")
      ->capture_default_str();
  app.add_option("--antennas", c.antennas, "BS antennas (M)")->capture_default_str();
  app.add_option("--p-max-mw,--p_max_mw", c.p_max_mw, "Downlink power budget per cell (mW)")
      ->capture_default_str();
  app.add_option("--noise-dbm,--noise_dbm", c.noise_dbm, "Noise power (dBm)")->capture_default_str();
  app.add_option("--cell-side-m,--cell_side_m", c.cell_side_m, "Cell side length (m)")->capture_default_str();
  app.add_option("--min-distance-m,--min_distance_m", c.min_distance_m, "BS exclusion radius (m)")
      ->capture_default_str();
  app.add_option("--bandwidth-hz,--bandwidth_hz", c.bandwidth_hz, "Bandwidth (Hz)")->capture_default_str();
  app.add_option("--pilot-power-mw,--pilot_power_mw", c.pilot_power_mw, "Uplink pilot power (mW)")
      ->capture_default_str();
  app.add_option("--pathloss-1km-db,--pathloss_1km_db", c.pathloss_1km_db, "Pathloss at 1 km (dB)")
      ->capture_default_str();
  app.add_option("--pathloss-slope-db,--pathloss_slope_db", c.pathloss_slope_db, "Pathloss dB per decade")
      ->capture_default_str();
  app.add_option("--shadowing-std-db,--shadowing_std_db", c.shadowing_std_db, "Log-normal shadowing (dB)")
      ->capture_default_str();
  app.add_option("--csi", g.csi, "Channel estimates: pilot_mmse or perfect")
      ->check(CLI::IsMember({"pilot_mmse", "perfect"}))
      ->capture_default_str();
  app.add_option("--seed", c.rng_seed, "Master seed for user drops and channel draws")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--deterministic", g.deterministic,
               "Require order-deterministic reductions (always honoured; kept for scripts)");
  app.add_option("--run-dir,--run_dir", g.run_dir, "Output directory")
      ->envname("MIMOADV_RUN_DIR")
      ->capture_default_str();
}

void finalize(GlobalOptions& g) {
  if (g.schema_version != kConfigSchemaVersion) {
    throw VersionError("config schema_version " + std::to_string(g.schema_version) + " (expected " +
                       std::to_string(kConfigSchemaVersion) + ")");
  }
  g.config.csi = parse_csi_model(g.csi);
  g.config.validate();
}

void add_attack_options(CLI::App& sub, AttackConfig& a, std::size_t& n_test, std::uint64_t& seed,
                        std::size_t& max_candidates) {
  sub.add_option("--alpha", a.pgd_step, "PGD step size (m)")->capture_default_str();
  sub.add_option("--Q", a.pgd_iterations, "PGD iterations")->capture_default_str();
  sub.add_option("--mu", a.momentum, "MI-FGSM momentum decay")->capture_default_str();
  sub.add_option("--I", a.mi_iterations, "MI-FGSM iterations")->capture_default_str();
  sub.add_flag("--clamp-to-cells", a.clamp_to_cells, "Clamp adversarial positions to their cells");
  sub.add_option("--n-test", n_test, "Clean-feasible test samples")->capture_default_str();
  sub.add_option("--attack-seed", seed, "Seed for test drops and random perturbations")->capture_default_str();
  sub.add_option("--max-candidates", max_candidates, "Candidate drops before giving up")
      ->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"Adversarial attacks on neural max-product power allocation in massive MIMO"};
  app.set_config("--config", "", "Key-value configuration file (flags override it)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOptions g;
  add_network_options(app, g);

  // generate
  auto* gen = app.add_subcommand("generate", "Label random drops with the max-product oracle");
  pipeline::GenerateOptions gen_opts;
  std::string gen_precoder = "mr";
  std::string gen_out;
  gen->add_option("--samples,-n", gen_opts.samples, "Number of records")->required();
  gen->add_option("--precoder", gen_precoder, "mr or mmmse")
      ->check(CLI::IsMember({"mr", "mmmse"}))
      ->capture_default_str();
  gen->add_option("--mc-draws", gen_opts.dataset.mc_draws, "Monte-Carlo draws per sample (M-MMSE)")
      ->capture_default_str();
  gen->add_option("--max-iters", gen_opts.dataset.solver.max_iters, "Solver iteration cap")->capture_default_str();
  gen->add_option("--tolerance", gen_opts.dataset.solver.tolerance, "Projected-gradient tolerance")
      ->capture_default_str();
  gen->add_option("--out,-o", gen_out, "Dataset file (default <run-dir>/dataset_<precoder>.bin)");
  gen->add_flag("--csv", gen_opts.csv, "Also export a CSV copy");

  // train
  auto* tr = app.add_subcommand("train", "Train per-cell models on a dataset");
  pipeline::TrainOptions tr_opts;
  std::string tr_model = "model1";
  std::string tr_cell = "all";
  std::string tr_dataset;
  std::string tr_out;
  tr->add_option("--dataset,-d", tr_dataset, "Dataset file")->required();
  tr->add_option("--model", tr_model, "model1 or model2")
      ->check(CLI::IsMember({"model1", "model2"}))
      ->capture_default_str();
  tr->add_option("--cell", tr_cell, "Cell index or 'all'")->capture_default_str();
  tr->add_option("--out-dir", tr_out, "Model directory (default <run-dir>/<model>)");
  tr->add_option("--epochs", tr_opts.params.max_epochs, "Maximum epochs")->capture_default_str();
  tr->add_option("--batch", tr_opts.params.batch_size, "Minibatch size")->capture_default_str();
  tr->add_option("--lr", tr_opts.params.learning_rate, "Adam learning rate")->capture_default_str();
  tr->add_option("--patience", tr_opts.params.patience, "Early-stopping patience")->capture_default_str();
  tr->add_option("--train-seed", tr_opts.seed, "Initialization and shuffling seed")->capture_default_str();
  std::string tr_scaling = "fixed";
  tr->add_option("--input-scaling", tr_scaling,
                 "none: plain init on raw metres; folded: raw metres, standardization folded into the "
                 "initial first layer; fixed: stored standardization layer")
      ->check(CLI::IsMember({"none", "folded", "fixed"}))
      ->capture_default_str();
  tr->add_option("--max-samples", tr_opts.max_samples, "Use at most this many records (0 = all)")
      ->capture_default_str();

  // attack: one method at one epsilon, per-record CSV
  auto* atk = app.add_subcommand("attack", "Attack models with one method at one epsilon");
  pipeline::EvalOptions atk_opts;
  std::string atk_method = "pgd";
  double atk_eps = 0.2;
  std::string atk_models, atk_surrogate, atk_victim;
  bool atk_blackbox = false;
  atk->add_option("--method", atk_method, "fgsm, pgd, mifgsm or random")
      ->check(CLI::IsMember({"fgsm", "pgd", "mifgsm", "random"}))
      ->capture_default_str();
  atk->add_option("--eps", atk_eps, "L-infinity radius (m)")->capture_default_str();
  atk->add_option("--models", atk_models, "White-box model directory");
  atk->add_flag("--blackbox", atk_blackbox, "Craft on --surrogate, judge on --victim");
  atk->add_option("--surrogate", atk_surrogate, "Surrogate model directory");
  atk->add_option("--victim", atk_victim, "Victim model directory");
  add_attack_options(*atk, atk_opts.spec.attack, atk_opts.spec.n_test, atk_opts.spec.seed,
                     atk_opts.max_candidates);

  // eval: method x epsilon grid
  auto* ev = app.add_subcommand("eval", "Success rates over a method x epsilon grid");
  pipeline::EvalOptions ev_opts;
  std::vector<std::string> ev_methods = {"fgsm", "mifgsm", "pgd", "random"};
  std::string ev_models, ev_surrogate, ev_victim;
  bool ev_blackbox = false;
  ev->add_option("--methods", ev_methods, "Attack methods")
      ->check(CLI::IsMember({"fgsm", "pgd", "mifgsm", "random"}))
      ->capture_default_str();
  ev->add_option("--eps", ev_opts.spec.epsilons, "Strictly increasing epsilon grid (m)")->capture_default_str();
  ev->add_option("--models", ev_models, "White-box model directory");
  ev->add_flag("--blackbox", ev_blackbox, "Craft on --surrogate, judge on --victim");
  ev->add_option("--surrogate", ev_surrogate, "Surrogate model directory");
  ev->add_option("--victim", ev_victim, "Victim model directory");
  ev->add_flag("--records", ev_opts.write_records, "Also write the per-record attack CSV");
  add_attack_options(*ev, ev_opts.spec.attack, ev_opts.spec.n_test, ev_opts.spec.seed, ev_opts.max_candidates);

  auto* rep = app.add_subcommand("report", "Summary JSON and plot script from the rates CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  }

  finalize(g);
  const std::filesystem::path run_dir = g.run_dir;

  if (*gen) {
    gen_opts.config = g.config;
    gen_opts.dataset.precoder = parse_precoder(gen_precoder);
    gen_opts.dataset.threads = g.threads;
    gen_opts.output = gen_out.empty() ? run_dir / ("dataset_" + gen_precoder + ".bin")
                                      : std::filesystem::path(gen_out);
    const auto r = pipeline::generate(gen_opts);
    std::cout << "wrote " << gen_opts.samples << " records to " << r.dataset.string()
              << " (resampled drops: " << r.stats.resampled
              << ", singular MC draws: " << r.stats.mc_resampled_draws
              << ", clipped MC entries: " << r.stats.mc_clipped_entries << ")\n";
    return 0;
  }

  if (*tr) {
    tr_opts.config = g.config;
    tr_opts.dataset = tr_dataset;
    tr_opts.model = parse_model_id(tr_model);
    if (tr_cell != "all") {
      try {
        tr_opts.cell = std::stoi(tr_cell);
      } catch (const std::logic_error&) {
        std::cerr << "usage error: --cell must be an integer or 'all'\n";
        return kExitUsage;
      }
    }
    tr_opts.output_dir = tr_out.empty() ? run_dir / tr_model : std::filesystem::path(tr_out);
    tr_opts.threads = g.threads;
    tr_opts.params.input_scaling = tr_scaling == "none"    ? InputScaling::kNone
                                   : tr_scaling == "fixed" ? InputScaling::kFixed
                                                           : InputScaling::kFoldedInit;
    const auto r = pipeline::train(tr_opts);
    for (std::size_t i = 0; i < r.models.size(); ++i) {
      const TrainReport& t = r.reports[i];
      std::cout << r.models[i].string() << ": epochs " << t.epochs << " (best " << t.best_epoch
                << "), val MSE " << t.initial_validation_mse << " -> " << t.validation_mse << ", train MSE "
                << t.train_mse << ", " << t.wall_seconds << " s\n";
    }
    return 0;
  }

  auto setup_models = [](pipeline::EvalOptions& o, bool blackbox, const std::string& models,
                         const std::string& surrogate, const std::string& victim) -> bool {
    if (blackbox) {
      if (surrogate.empty() || victim.empty()) return false;
      o.models = surrogate;
      o.victim = std::filesystem::path(victim);
    } else {
      if (models.empty()) return false;
      o.models = models;
    }
    return true;
  };

  if (*atk || *ev) {
    const bool is_attack = static_cast<bool>(*atk);
    pipeline::EvalOptions& o = is_attack ? atk_opts : ev_opts;
    const bool ok = is_attack ? setup_models(o, atk_blackbox, atk_models, atk_surrogate, atk_victim)
                              : setup_models(o, ev_blackbox, ev_models, ev_surrogate, ev_victim);
    if (!ok) {
      std::cerr << "usage error: give --models DIR, or --blackbox --surrogate DIR --victim DIR\n";
      return kExitUsage;
    }
    o.config = g.config;
    o.run_dir = run_dir;
    o.spec.threads = g.threads;
    if (is_attack) {
      o.spec.methods = {parse_attack_method(atk_method)};
      o.spec.epsilons = {atk_eps};
      o.write_records = true;
    } else {
      o.spec.methods.clear();
      for (const auto& m : ev_methods) o.spec.methods.push_back(parse_attack_method(m));
    }
    const auto r = pipeline::evaluate(o);
    std::cout << "clean-feasible samples: " << o.spec.n_test << " of " << r.candidates_drawn
              << " candidates\n";
    for (const RateEntry& e : r.table.entries) {
      if (e.cell != -1) continue;
      std::cout << to_string(e.method) << " eps=" << e.epsilon << ": " << 100.0 * e.rate() << "% ("
                << e.successes << "/" << e.trials << ")\n";
    }
    std::cout << "wrote " << r.rates_csv.string() << " and " << r.summary_json.string() << "\n";
    return 0;
  }

  if (*rep) {
    const auto script = pipeline::report(run_dir);
    std::cout << "wrote " << script.string() << "\n";
    return 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mimoadv::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const mimoadv::VersionError& e) {
    std::cerr << "version error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const mimoadv::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
