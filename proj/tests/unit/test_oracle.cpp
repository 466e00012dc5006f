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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mimoadv/oracle.hpp"
#include "reference.hpp"

namespace mimoadv {
namespace {

GainTable drop_gains(const NetworkConfig& c, std::uint64_t index) {
  const CellLayout g = build_geometry(c);
  Rng rng = make_rng(77, StreamKind::kUserDrop, index);
  const UePositions u = drop_users(c, g, rng);
  return mr_gains_closed_form(compute_fading(c, g, u), c);
}

TEST(Oracle, ProjectionIsTheNearestFeasiblePoint) {
  Rng rng = make_rng(1, StreamKind::kTraining, 0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(5);
    for (double& x : v) x = 2.0 * standard_normal(rng);
    std::vector<double> p = v;
    project_capped_simplex(p, 1.0);
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    ASSERT_LE(sum, 1.0 + 1e-12);
    for (double x : p) ASSERT_GE(x, 0.0);
    // Variational inequality against random feasible points.
    for (int t = 0; t < 50; ++t) {
      std::vector<double> y(5);
      for (double& x : y) x = uniform01(rng);
      const double s = std::accumulate(y.begin(), y.end(), 0.0);
      const double shrink = uniform01(rng) / s;
      double inner = 0.0;
      for (int i = 0; i < 5; ++i) inner += (v[i] - p[i]) * (y[i] * shrink - p[i]);
      ASSERT_LE(inner, 1e-12);
    }
  }
}

TEST(Oracle, ProjectionLeavesFeasiblePointsAlone) {
  std::vector<double> p = {0.1, 0.2, 0.3};
  project_capped_simplex(p, 1.0);
  EXPECT_EQ(p, (std::vector<double>{0.1, 0.2, 0.3}));
  std::vector<double> q = {-1.0, 0.5};
  project_capped_simplex(q, 1.0);
  EXPECT_EQ(q, (std::vector<double>{0.0, 0.5}));
}

TEST(Oracle, SinrMatchesDefinition) {
  NetworkConfig c;
  const GainTable t = drop_gains(c, 0);
  PowerAllocation p(4, 5);
  Rng rng = make_rng(2, StreamKind::kTraining, 0);
  for (double& r : p.rho) r = 100.0 * uniform01(rng);
  const std::vector<double> s = sinr(t, p, c.noise_mw());
  double log_sum = 0.0;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 5; ++k) {
      const double ref = testing::reference_sinr(t, p, c.noise_mw(), j, k);
      EXPECT_NEAR(s[static_cast<std::size_t>(j * 5 + k)], ref, 1e-12 * ref);
      log_sum += std::log(ref);
    }
  EXPECT_NEAR(log_sinr_product(t, p, c.noise_mw()), log_sum, 1e-10);
  p(2, 3) = 0.0;
  EXPECT_EQ(log_sinr_product(t, p, c.noise_mw()), -INFINITY);
}

TEST(Oracle, SolutionIsFeasibleMonotoneAndLocallyOptimal) {
  NetworkConfig c;
  for (std::uint64_t n = 0; n < 10; ++n) {
    const GainTable t = drop_gains(c, n);
    const SolveResult r = solve_max_product(t, c, {}, true);
    ASSERT_TRUE(r.converged) << "drop " << n;
    for (int j = 0; j < 4; ++j) EXPECT_LE(r.power.cell_sum(j), c.p_max_mw * (1.0 + 1e-9));
    for (double v : r.power.rho) EXPECT_GT(v, 0.0);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1]);
    EXPECT_NEAR(r.log_objective, log_sinr_product(t, r.power, c.noise_mw()), 1e-9);

    // No small feasible perturbation improves the objective.
    Rng rng = make_rng(n, StreamKind::kTraining, 9);
    for (int trial = 0; trial < 200; ++trial) {
      PowerAllocation q = r.power;
      for (double& v : q.rho) v *= std::exp(0.02 * standard_normal(rng));
      for (int j = 0; j < 4; ++j) {
        const double s = q.cell_sum(j);
        if (s > c.p_max_mw)
          for (int k = 0; k < 5; ++k) q(j, k) *= c.p_max_mw / s;
      }
      EXPECT_LE(log_sinr_product(t, q, c.noise_mw()), r.log_objective + 1e-9);
    }
  }
}

TEST(Oracle, SingleUserUsesFullPower) {
  NetworkConfig c;
  c.grid_rows = c.grid_cols = 1;
  c.users_per_cell = 1;
  const SolveResult r = solve_max_product(drop_gains(c, 0), c);
  EXPECT_NEAR(r.power(0, 0), c.p_max_mw, 1e-6 * c.p_max_mw);
}

TEST(Oracle, SymmetricUsersGetEqualPowers) {
  NetworkConfig c;
  c.grid_rows = c.grid_cols = 1;
  c.users_per_cell = 3;
  GainTable t(1, 3);
  for (double& v : t.a) v = 1e-8;
  for (double& v : t.b) v = 1e-11;
  const SolveResult r = solve_max_product(t, c);
  ASSERT_TRUE(r.converged);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.power(0, k), c.p_max_mw / 3.0, 1e-5);
}

TEST(Oracle, CoarseGridNeverBeatsSolver) {
  NetworkConfig c;
  c.grid_rows = 1;
  c.grid_cols = 2;
  c.users_per_cell = 2;
  constexpr int kSteps = 40;
  for (std::uint64_t n = 0; n < 3; ++n) {
    const GainTable t = drop_gains(c, n);
    const SolveResult r = solve_max_product(t, c);
    double best = -INFINITY;
    PowerAllocation p(2, 2);
    for (int a = 1; a < kSteps; ++a)
      for (int b = 1; a + b <= kSteps; ++b)
        for (int e = 1; e < kSteps; ++e)
          for (int f = 1; e + f <= kSteps; ++f) {
            p(0, 0) = c.p_max_mw * a / kSteps;
            p(0, 1) = c.p_max_mw * b / kSteps;
            p(1, 0) = c.p_max_mw * e / kSteps;
            p(1, 1) = c.p_max_mw * f / kSteps;
            best = std::max(best, std::log(testing::reference_sinr_product(t, p, c.noise_mw())));
          }
    EXPECT_GE(r.log_objective, best - 1e-9);
  }
}

}  // namespace
}  // namespace mimoadv
