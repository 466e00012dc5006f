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

// Acceptance checks. Prints one "CRITERION n PASS|FAIL: ..." line per
// criterion and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mimoadv/attacks.hpp"
#include "mimoadv/channel.hpp"
#include "mimoadv/digest.hpp"
#include "mimoadv/eval.hpp"
#include "mimoadv/nn.hpp"
#include "mimoadv/oracle.hpp"
#include "mimoadv/pipeline.hpp"
#include "mimoadv/rng.hpp"
#include "mimoadv/scenario.hpp"
#include "reference.hpp"

namespace fs = std::filesystem;
using namespace mimoadv;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Context {
  fs::path work;
  int threads = 1;
  int model2_epochs = 40;
  std::size_t mr_samples = 50000;
  std::size_t mmmse_samples = 2000;
  std::uint32_t mmmse_draws = 1000;
  std::size_t n_test = 500;
  bool mr_models_ready = false;
};

// Random model with non-trivial biases and an input standardization in the
// range a trained model would carry.
MlpModel random_model(ModelId id, const NetworkConfig& cfg, std::uint64_t seed) {
  ModelMeta meta;
  meta.output_scale = cfg.p_max_mw;
  MlpModel m = MlpModel::architecture(id, cfg.users_per_cell, cfg.num_cells(), meta);
  m.initialize(seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (DenseLayer& l : m.mutable_layers()) {
    if (!l.spec.trainable) continue;
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.2 * standard_normal(rng);
  }
  const auto n = static_cast<Eigen::Index>(cfg.input_dim());
  Eigen::VectorXd shift(n), scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    shift(i) = cfg.cell_side_m * 2.0 * uniform01(rng);
    scale(i) = 40.0 + 120.0 * uniform01(rng);
  }
  m.set_input_normalization(shift, scale);
  return m;
}

// ---------------------------------------------------------------------------

Verdict criterion1(Context&) {
  const NetworkConfig cfg;
  const MlpModel m1 = MlpModel::architecture(ModelId::kModel1, cfg.users_per_cell, cfg.num_cells());
  const MlpModel m2 = MlpModel::architecture(ModelId::kModel2, cfg.users_per_cell, cfg.num_cells());
  const std::vector<std::size_t> want1 = {2624, 2080, 1056, 1056, 165};
  const std::vector<std::size_t> want2 = {20992, 131328, 32896, 16512, 645};
  auto layers_ok = [](const MlpModel& m, const std::vector<std::size_t>& want) {
    std::size_t t = 0;
    for (const DenseLayer& l : m.layers()) {
      if (!l.spec.trainable) continue;
      if (t >= want.size() || l.spec.param_count() != want[t]) return false;
      ++t;
    }
    return t == want.size();
  };
  const bool ok = m1.param_count() == 6981 && m2.param_count() == 202373 && layers_ok(m1, want1) &&
                  layers_ok(m2, want2);
  return {ok, fmt("model1 trainable=%zu model2 trainable=%zu, per-layer counts %s", m1.param_count(),
                  m2.param_count(), (layers_ok(m1, want1) && layers_ok(m2, want2)) ? "match" : "differ")};
}

Verdict criterion2(Context&) {
  const NetworkConfig cfg;
  const CellLayout layout = build_geometry(cfg);
  double worst = 0.0;
  int checked = 0, skipped = 0;
  Rng drops(2024);
  for (int pair = 0; checked < 100; ++pair) {
    const ModelId id = pair % 2 == 0 ? ModelId::kModel1 : ModelId::kModel2;
    const MlpModel m = random_model(id, cfg, 100 + static_cast<std::uint64_t>(pair));
    const std::vector<double> x = drop_users(cfg, layout, drops).coords;
    if (testing::min_elu_margin(m, x) < 1e-3) {
      ++skipped;
      continue;
    }
    const LossSelector loss = LossSelector::sum_of_powers(cfg.users_per_cell, m.output_dim(), 1.0);
    const std::vector<double> g = m.input_gradient(x, loss);
    const std::vector<double> fd = testing::central_difference(
        [&](std::span<const double> v) {
          const Eigen::VectorXd out = m.forward(v);
          return loss.weights.dot(out);
        },
        x, 1e-4);
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      diff += (g[i] - fd[i]) * (g[i] - fd[i]);
      ref += fd[i] * fd[i];
    }
    worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(ref), 1e-300));
    ++checked;
  }
  return {worst < 1e-5, fmt("%d pairs (%d near-kink skipped), max relative error %.3e", checked, skipped, worst)};
}

// Exhaustive search over per-cell power grids for L = 2, K = 2. The four
// SINR denominators split into a part driven by each cell's powers, so the
// search runs as a dense double loop over per-cell grid points.
struct CellGrid {
  std::vector<double> r0, r1;
};

CellGrid coarse_grid(double p_max, int steps) {
  CellGrid g;
  const double d = p_max / steps;
  for (int i = 1; i < steps; ++i) {
    for (int j = 1; i + j <= steps; ++j) {
      g.r0.push_back(i * d);
      g.r1.push_back(j * d);
    }
  }
  return g;
}

CellGrid fine_grid(double p_max, double c0, double c1, double half_width, int sub) {
  CellGrid g;
  const double d = half_width / sub;
  for (int i = -sub; i <= sub; ++i) {
    for (int j = -sub; j <= sub; ++j) {
      const double a = c0 + i * d, b = c1 + j * d;
      if (a <= 0.0 || b <= 0.0 || a + b > p_max * (1.0 + 1e-15)) continue;
      g.r0.push_back(a);
      g.r1.push_back(b);
    }
  }
  return g;
}

struct GridBest {
  double log_objective = -INFINITY;
  double p[4] = {0, 0, 0, 0};
};

GridBest grid_search(const GainTable& t, double noise, const CellGrid& g0, const CellGrid& g1) {
  // Users u = 2 j + k. Contribution of cell l's powers to user u's denominator.
  auto b = [&](int l, int i, int u) { return t.b_at(l, i, u / 2, u % 2); };
  const std::size_t n1 = g1.r0.size();
  std::vector<double> num1(n1), e[4];
  for (int u = 0; u < 4; ++u) e[u].resize(n1);
  for (std::size_t m = 0; m < n1; ++m) {
    num1[m] = g1.r0[m] * g1.r1[m];
    for (int u = 0; u < 4; ++u) e[u][m] = g1.r0[m] * b(1, 0, u) + g1.r1[m] * b(1, 1, u);
  }
  double log_a = 0.0;
  for (int u = 0; u < 4; ++u) log_a += std::log(t.a_at(u / 2, u % 2));
  GridBest best;
  for (std::size_t n = 0; n < g0.r0.size(); ++n) {
    double base[4];
    for (int u = 0; u < 4; ++u) base[u] = noise + g0.r0[n] * b(0, 0, u) + g0.r1[n] * b(0, 1, u);
    double top = 0.0;
    std::size_t arg = 0;
    for (std::size_t m = 0; m < n1; ++m) {
      const double r = num1[m] / ((base[0] + e[0][m]) * (base[1] + e[1][m]) * (base[2] + e[2][m]) *
                                  (base[3] + e[3][m]));
      if (r > top) {
        top = r;
        arg = m;
      }
    }
    const double f = log_a + std::log(g0.r0[n] * g0.r1[n]) + std::log(top);
    if (f > best.log_objective) {
      best.log_objective = f;
      best.p[0] = g0.r0[n];
      best.p[1] = g0.r1[n];
      best.p[2] = g1.r0[arg];
      best.p[3] = g1.r1[arg];
    }
  }
  return best;
}

Verdict criterion3(Context&) {
  NetworkConfig cfg;
  cfg.grid_rows = 1;
  cfg.grid_cols = 2;
  cfg.users_per_cell = 2;
  const CellLayout layout = build_geometry(cfg);
  const double noise = cfg.noise_mw();
  const int steps = 200;
  const CellGrid coarse = coarse_grid(cfg.p_max_mw, steps);
  double worst_gap = 0.0, worst_budget = 0.0;
  int solver_beaten = 0;
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng(7000 + static_cast<std::uint64_t>(inst));
    const UePositions users = drop_users(cfg, layout, rng);
    const GainTable t = mr_gains_closed_form(compute_fading(cfg, layout, users), cfg);
    const SolveResult s = solve_max_product(t, cfg);
    for (int j = 0; j < 2; ++j) {
      worst_budget = std::max(worst_budget, s.power.cell_sum(j) - cfg.p_max_mw);
      for (int k = 0; k < 2; ++k) worst_budget = std::max(worst_budget, -s.power(j, k));
    }
    const double f_solver = std::log(testing::reference_sinr_product(t, s.power, noise));
    GridBest best = grid_search(t, noise, coarse, coarse);
    // Refine around the coarse optimum at 1/20 of the coarse step.
    const double step = cfg.p_max_mw / steps;
    const GridBest fine = grid_search(t, noise, fine_grid(cfg.p_max_mw, best.p[0], best.p[1], 2 * step, 40),
                                      fine_grid(cfg.p_max_mw, best.p[2], best.p[3], 2 * step, 40));
    if (fine.log_objective > best.log_objective) best = fine;
    if (best.log_objective > f_solver + 1e-3) ++solver_beaten;
    worst_gap = std::max(worst_gap, std::abs(best.log_objective - f_solver));
  }
  const bool ok = worst_gap <= 1e-3 && worst_budget <= 1e-9 * cfg.p_max_mw;
  return {ok, fmt("20 instances, max |F_solver - F_grid| = %.2e (solver beaten %d times), max budget excess %.2e mW",
                  worst_gap, solver_beaten, worst_budget)};
}

Verdict criterion4(Context& ctx) {
  const NetworkConfig cfg;
  const CellLayout layout = build_geometry(cfg);
  std::size_t entries = 0, beyond3 = 0;
  double max_z = 0.0;
  for (int d = 0; d < 20; ++d) {
    Rng rng(9100 + static_cast<std::uint64_t>(d));
    const LargeScaleFading fading = compute_fading(cfg, layout, drop_users(cfg, layout, rng));
    const GainTable exact = mr_gains_closed_form(fading, cfg);
    MonteCarloOptions mc;
    mc.num_draws = 100000;
    mc.seed = 500 + static_cast<std::uint64_t>(d);
    mc.threads = ctx.threads;
    const GainTable est = monte_carlo_gains(fading, cfg, Precoder::kMr, mc);
    auto tally = [&](double e, double x, double se) {
      const double z = std::abs(e - x) / se;
      ++entries;
      if (z > 3.0) ++beyond3;
      max_z = std::max(max_z, z);
    };
    for (std::size_t i = 0; i < exact.a.size(); ++i) tally(est.a[i], exact.a[i], est.a_std_error[i]);
    for (std::size_t i = 0; i < exact.b.size(); ++i) tally(est.b[i], exact.b[i], est.b_std_error[i]);
  }
  const double frac = static_cast<double>(beyond3) / static_cast<double>(entries);
  const bool ok = frac <= 0.01 && max_z < 5.0;
  return {ok, fmt("%zu entries over 20 drops, %zu beyond 3 SE (%.2f%%, normal expectation 0.27%%), max |z| %.2f",
                  entries, beyond3, 100.0 * frac, max_z)};
}

Verdict criterion5(Context&) {
  const NetworkConfig cfg;
  const CellLayout layout = build_geometry(cfg);
  const MlpModel m1 = random_model(ModelId::kModel1, cfg, 31);
  const MlpModel m2 = random_model(ModelId::kModel2, cfg, 32);
  const double eps_grid[] = {0.1, 0.2, 0.3, 0.4};
  Rng drops(77), noise(78);
  int identical = 0, box_violations = 0, outputs = 0;
  double max_excess = -INFINITY;
  for (int s = 0; s < 50; ++s) {
    const MlpModel& m = s % 2 == 0 ? m1 : m2;
    const std::vector<double> x = drop_users(cfg, layout, drops).coords;
    const double eps = eps_grid[s % 4];
    const std::vector<double> fgsm = craft_fgsm(m, x, eps);
    AttackConfig pgd1;
    pgd1.method = AttackMethod::kPgd;
    pgd1.epsilon = eps;
    pgd1.pgd_step = eps;
    pgd1.pgd_iterations = 1;
    AttackConfig mi1;
    mi1.method = AttackMethod::kMiFgsm;
    mi1.epsilon = eps;
    mi1.mi_iterations = 1;
    mi1.momentum = 0.0;
    const std::vector<double> a = craft_pgd(m, x, pgd1);
    const std::vector<double> b = craft_mifgsm(m, x, mi1);
    if (a == fgsm && b == fgsm) ++identical;
    AttackConfig pgd = pgd1, mi = mi1;
    pgd.pgd_step = 0.01;
    pgd.pgd_iterations = 40;
    mi.mi_iterations = 10;
    mi.momentum = 0.1;
    for (const std::vector<double>& adv :
         {fgsm, a, b, craft_pgd(m, x, pgd), craft_mifgsm(m, x, mi), craft_random(x, eps, noise)}) {
      double linf = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) linf = std::max(linf, std::abs(adv[i] - x[i]));
      max_excess = std::max(max_excess, linf - eps);
      if (linf > eps + 1e-12) ++box_violations;
      ++outputs;
    }
  }
  return {identical == 50 && box_violations == 0,
          fmt("%d/50 samples bit-identical, %d/%d outputs outside the eps box (max ||d||inf - eps = %.1e)",
              identical, box_violations, outputs, max_excess)};
}

// ---------------------------------------------------------------------------
// Trend checks on trained models.

void ensure_mr_models(Context& ctx) {
  if (ctx.mr_models_ready) return;
  const NetworkConfig cfg;
  const fs::path dir = ctx.work / "mr";
  fs::create_directories(dir);
  pipeline::GenerateOptions gen;
  gen.config = cfg;
  gen.samples = ctx.mr_samples;
  gen.dataset.precoder = Precoder::kMr;
  gen.dataset.threads = ctx.threads;
  gen.output = dir / "dataset_mr.bin";
  pipeline::generate(gen);
  for (ModelId id : {ModelId::kModel1, ModelId::kModel2}) {
    pipeline::TrainOptions tr;
    tr.config = cfg;
    tr.dataset = gen.output;
    tr.model = id;
    tr.output_dir = dir / to_string(id);
    tr.threads = ctx.threads;
    if (id == ModelId::kModel2) tr.params.max_epochs = ctx.model2_epochs;
    const pipeline::TrainResult r = pipeline::train(tr);
    for (std::size_t j = 0; j < r.reports.size(); ++j) {
      std::cout << "  trained " << to_string(id) << " cell " << j << ": epochs " << r.reports[j].epochs
                << ", val MSE " << r.reports[j].validation_mse << ", " << r.reports[j].wall_seconds << " s\n";
    }
  }
  ctx.mr_models_ready = true;
}

pipeline::EvalOptions eval_options(const Context& ctx, const fs::path& run_dir, std::vector<double> eps) {
  pipeline::EvalOptions ev;
  ev.config = NetworkConfig{};
  ev.spec.epsilons = std::move(eps);
  ev.spec.n_test = ctx.n_test;
  ev.spec.threads = ctx.threads;
  ev.run_dir = run_dir;
  return ev;
}

std::string rate_row(const SuccessRateTable& t, double eps) {
  std::string s = fmt("eps=%.1f", eps);
  for (AttackMethod m : {AttackMethod::kPgd, AttackMethod::kMiFgsm, AttackMethod::kFgsm, AttackMethod::kRandom}) {
    s += fmt(" %s=%.1f%%", to_string(m).c_str(), 100.0 * t.rate(-1, m, eps));
  }
  return s;
}

Verdict criterion6(Context& ctx) {
  ensure_mr_models(ctx);
  struct Case {
    ModelId id;
    std::vector<double> eps;
  };
  const Case cases[] = {{ModelId::kModel1, {0.3, 0.4}}, {ModelId::kModel2, {0.1, 0.2}}};
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    pipeline::EvalOptions ev = eval_options(ctx, ctx.work / "mr" / ("whitebox_" + to_string(c.id)), c.eps);
    ev.models = ctx.work / "mr" / to_string(c.id);
    ev.model = c.id;
    const SuccessRateTable t = pipeline::evaluate(ev).table;
    const AttackMethod order[] = {AttackMethod::kPgd, AttackMethod::kMiFgsm, AttackMethod::kFgsm,
                                  AttackMethod::kRandom};
    int order_violations = 0, monotone_violations = 0;
    for (double e : c.eps) {
      bool row_ok = true;
      for (int i = 0; i + 1 < 4; ++i) row_ok = row_ok && t.rate(-1, order[i], e) >= t.rate(-1, order[i + 1], e);
      if (!row_ok) ++order_violations;
      std::cout << "  " << to_string(c.id) << " " << rate_row(t, e) << "\n";
    }
    for (AttackMethod m : order) {
      for (std::size_t i = 0; i + 1 < c.eps.size(); ++i) {
        if (t.rate(-1, m, c.eps[i + 1]) < t.rate(-1, m, c.eps[i])) ++monotone_violations;
      }
    }
    const double e_max = c.eps.back();
    const double gap = t.rate(-1, AttackMethod::kPgd, e_max) - t.rate(-1, AttackMethod::kRandom, e_max);
    const bool case_ok = order_violations <= 1 && monotone_violations <= 1 && gap >= 0.20;
    ok = ok && case_ok;
    detail += fmt("%s: ordering violations %d, monotonicity violations %d, PGD-random gap at eps=%.1f %.1f pp; ",
                  to_string(c.id).c_str(), order_violations, monotone_violations, e_max, 100.0 * gap);
  }
  return {ok, detail};
}

Verdict criterion7(Context& ctx) {
  ensure_mr_models(ctx);
  const NetworkConfig cfg;
  const std::vector<double> eps = {0.2, 0.3, 0.4};
  const AttackMethod transfer[] = {AttackMethod::kFgsm, AttackMethod::kMiFgsm, AttackMethod::kPgd};

  pipeline::EvalOptions mr = eval_options(ctx, ctx.work / "mr" / "blackbox", eps);
  mr.models = ctx.work / "mr" / "model1";
  mr.model = ModelId::kModel1;
  mr.victim = ctx.work / "mr" / "model2";
  mr.victim_model = ModelId::kModel2;
  const SuccessRateTable t_mr = pipeline::evaluate(mr).table;
  for (double e : eps) std::cout << "  MR blackbox " << rate_row(t_mr, e) << "\n";

  // M-MMSE models at reduced scale: every label needs Monte-Carlo gains.
  const fs::path dir = ctx.work / "mmmse";
  fs::create_directories(dir);
  pipeline::GenerateOptions gen;
  gen.config = cfg;
  gen.samples = ctx.mmmse_samples;
  gen.dataset.precoder = Precoder::kMmmse;
  gen.dataset.mc_draws = ctx.mmmse_draws;
  gen.dataset.threads = ctx.threads;
  gen.output = dir / "dataset_mmmse.bin";
  pipeline::generate(gen);
  for (ModelId id : {ModelId::kModel1, ModelId::kModel2}) {
    pipeline::TrainOptions tr;
    tr.config = cfg;
    tr.dataset = gen.output;
    tr.model = id;
    tr.output_dir = dir / to_string(id);
    tr.threads = ctx.threads;
    pipeline::train(tr);
  }
  pipeline::EvalOptions mm = eval_options(ctx, dir / "blackbox", eps);
  mm.models = dir / "model1";
  mm.model = ModelId::kModel1;
  mm.victim = dir / "model2";
  mm.victim_model = ModelId::kModel2;
  const SuccessRateTable t_mm = pipeline::evaluate(mm).table;
  for (double e : eps) std::cout << "  M-MMSE blackbox " << rate_row(t_mm, e) << "\n";

  const double e = 0.4;
  const double rnd_mr = t_mr.rate(-1, AttackMethod::kRandom, e);
  const double rnd_mm = t_mm.rate(-1, AttackMethod::kRandom, e);
  double best_mr = -1.0, worst_mm = 0.0;
  bool all_exceed = true;
  for (AttackMethod m : transfer) {
    best_mr = std::max(best_mr, t_mr.rate(-1, m, e));
    all_exceed = all_exceed && t_mr.rate(-1, m, e) > rnd_mr;
    worst_mm = std::max(worst_mm, std::abs(t_mm.rate(-1, m, e) - rnd_mm));
  }
  const double gap = best_mr - rnd_mr;
  const bool ok = all_exceed && gap >= 0.10 && worst_mm <= 0.05;
  return {ok, fmt("MR at eps=0.4: best transfer %.1f%% vs random %.1f%% (gap %.1f pp, need >= 10, all methods above "
                  "random: %s); M-MMSE max |transfer - random| %.1f pp (need <= 5)",
                  100.0 * best_mr, 100.0 * rnd_mr, 100.0 * gap, all_exceed ? "yes" : "no", 100.0 * worst_mm)};
}

Verdict criterion8(Context&) {
  const std::pair<double, double> pairs[] = {{42.4, 0.3}, {56.5, 0.4}, {14.1, 0.1}, {28.2, 0.2}};
  bool ok = true;
  std::string detail;
  for (auto [cm, eps] : pairs) {
    // The quoted centimetres are d = sqrt(2) eps truncated to one decimal.
    const double d_cm = 100.0 * eps * std::sqrt(2.0);
    const bool round_trip = std::abs(epsilon_from_distance(d_cm / 100.0) - eps) < 1e-15;
    const bool quoted = d_cm - cm >= 0.0 && d_cm - cm < 0.1;
    const bool near = std::abs(epsilon_from_distance(cm / 100.0) - eps) < 0.001 / std::sqrt(2.0);
    ok = ok && round_trip && quoted && near;
    detail += fmt("%.1f cm -> %.4f (d(eps)=%.3f cm); ", cm, epsilon_from_distance(cm / 100.0), d_cm);
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::map<std::string, std::string> digests(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    // Manifests record wall time and absolute paths.
    if (name.ends_with("manifest.json") || name == "cli.log") continue;
    out[fs::relative(e.path(), root).string()] = sha256_file(e.path());
  }
  return out;
}

Verdict criterion9(Context& ctx) {
  const std::string cli = MIMOADV_CLI_PATH;
  auto run_pipeline = [&](const fs::path& dir, int threads) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string root = cli + " --seed 11 --deterministic --threads " + std::to_string(threads) +
                             " --run-dir " + dir.string() + " ";
    const std::string log = " >> " + (dir / "cli.log").string() + " 2>&1";
    const std::string ds = " -d " + (dir / "dataset_mr.bin").string();
    const std::vector<std::string> steps = {
        "generate -n 600",
        "generate -n 6 --precoder mmmse --mc-draws 1000",
        "train --model model1 --epochs 4" + ds,
        "train --model model2 --epochs 1 --max-samples 300" + ds,
        "attack --models " + (dir / "model1").string() + " --method pgd --eps 0.3 --n-test 40",
        "eval --records --models " + (dir / "model1").string() + " --eps 0.1 0.3 --n-test 40",
        "eval --blackbox --surrogate " + (dir / "model1").string() + " --victim " + (dir / "model2").string() +
            " --eps 0.2 0.4 --n-test 40",
        "report",
    };
    for (const std::string& s : steps) {
      if (shell(root + s + log) != 0) return std::string("command failed: ") + s;
    }
    return std::string();
  };
  const std::string err_a = run_pipeline(ctx.work / "determinism_a", 1);
  const std::string err_b = run_pipeline(ctx.work / "determinism_b", std::max(2, ctx.threads + 1));
  if (!err_a.empty() || !err_b.empty()) return {false, err_a + " " + err_b};
  const auto a = digests(ctx.work / "determinism_a");
  const auto b = digests(ctx.work / "determinism_b");
  std::size_t differing = 0;
  std::set<std::string> names;
  for (const auto& [k, v] : a) names.insert(k);
  for (const auto& [k, v] : b) names.insert(k);
  for (const std::string& n : names) {
    if (!a.contains(n) || !b.contains(n) || a.at(n) != b.at(n)) {
      ++differing;
      std::cout << "  differs: " << n << "\n";
    }
  }
  return {differing == 0 && !a.empty(),
          fmt("%zu artifacts compared across two runs (1 vs %d threads), %zu differ", names.size(),
              std::max(2, ctx.threads + 1), differing)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  Context ctx;
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work-dir", work, "Scratch directory for pipeline artifacts");
  app.add_option("--criteria", only, "Run only these criteria")->check(CLI::Range(1, 9));
  app.add_option("--threads", ctx.threads)->check(CLI::PositiveNumber);
  app.add_option("--mr-samples", ctx.mr_samples, "MR training samples");
  app.add_option("--mmmse-samples", ctx.mmmse_samples, "M-MMSE training samples");
  app.add_option("--mmmse-draws", ctx.mmmse_draws, "Monte-Carlo draws per M-MMSE sample");
  app.add_option("--model2-epochs", ctx.model2_epochs, "Epoch cap for Model2");
  app.add_option("--n-test", ctx.n_test, "Clean-feasible test samples");
  CLI11_PARSE(app, argc, argv);
  ctx.work = fs::absolute(work);
  fs::create_directories(ctx.work);

  const std::vector<std::function<Verdict(Context&)>> checks = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9};
  int failures = 0;
  for (int n = 1; n <= 9; ++n) {
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = checks[static_cast<std::size_t>(n - 1)](ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "CRITERION " << n << (v.pass ? " PASS: " : " FAIL: ") << v.detail << fmt(" [%.1f s]", secs)
              << std::endl;
    if (!v.pass) ++failures;
  }
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : fmt("%d CRITERIA FAILED", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
