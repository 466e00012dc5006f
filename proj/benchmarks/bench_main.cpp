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

#include <benchmark/benchmark.h>

#include <vector>

#include "mimoadv/attacks.hpp"
#include "mimoadv/channel.hpp"
#include "mimoadv/nn.hpp"
#include "mimoadv/oracle.hpp"
#include "mimoadv/rng.hpp"
#include "mimoadv/scenario.hpp"

namespace {

using namespace mimoadv;

struct Drop {
  NetworkConfig config;
  CellLayout layout;
  UePositions users;
  LargeScaleFading fading;

  explicit Drop(std::uint64_t seed) : layout(build_geometry(config)) {
    Rng rng(seed);
    users = drop_users(config, layout, rng);
    fading = compute_fading(config, layout, users);
  }
};

MlpModel make_model(ModelId id, const NetworkConfig& config) {
  ModelMeta meta;
  meta.output_scale = config.p_max_mw;
  MlpModel m = MlpModel::architecture(id, config.users_per_cell, config.num_cells(), meta);
  m.initialize(3);
  return m;
}

void BM_Forward(benchmark::State& state) {
  const Drop drop(1);
  const MlpModel m = make_model(static_cast<ModelId>(state.range(0)), drop.config);
  for (auto _ : state) benchmark::DoNotOptimize(m.forward(drop.users.coords));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(2)->ArgName("model");

void BM_InputGradient(benchmark::State& state) {
  const Drop drop(1);
  const MlpModel m = make_model(static_cast<ModelId>(state.range(0)), drop.config);
  const LossSelector loss = LossSelector::sum_of_powers(drop.config.users_per_cell, m.output_dim(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(m.input_gradient(drop.users.coords, loss));
}
BENCHMARK(BM_InputGradient)->Arg(1)->Arg(2)->ArgName("model");

void BM_Pgd(benchmark::State& state) {
  const Drop drop(1);
  const MlpModel m = make_model(ModelId::kModel1, drop.config);
  AttackConfig cfg;
  cfg.method = AttackMethod::kPgd;
  cfg.epsilon = 0.4;
  for (auto _ : state) benchmark::DoNotOptimize(craft_pgd(m, drop.users.coords, cfg));
}
BENCHMARK(BM_Pgd);

void BM_MrClosedForm(benchmark::State& state) {
  const Drop drop(2);
  for (auto _ : state) benchmark::DoNotOptimize(mr_gains_closed_form(drop.fading, drop.config));
}
BENCHMARK(BM_MrClosedForm);

void BM_Solver(benchmark::State& state) {
  const Drop drop(2);
  const GainTable gains = mr_gains_closed_form(drop.fading, drop.config);
  for (auto _ : state) benchmark::DoNotOptimize(solve_max_product(gains, drop.config));
}
BENCHMARK(BM_Solver)->Unit(benchmark::kMillisecond);

// Cost per Monte-Carlo channel draw.
void BM_MonteCarlo(benchmark::State& state) {
  const Drop drop(2);
  const auto precoder = static_cast<Precoder>(state.range(0));
  MonteCarloOptions options;
  options.num_draws = 1000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo_gains(drop.fading, drop.config, precoder, options));
  }
  state.SetItemsProcessed(state.iterations() * options.num_draws);
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->ArgName("mmmse")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
