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

#include <span>
#include <vector>

#include "mimoadv/channel.hpp"
#include "mimoadv/scenario.hpp"

namespace mimoadv {

/// rho(j, k) in mW.
struct PowerAllocation {
  int num_cells = 0;
  int users_per_cell = 0;
  std::vector<double> rho;

  PowerAllocation() = default;
  PowerAllocation(int cells, int users, double value = 0.0)
      : num_cells(cells), users_per_cell(users),
        rho(static_cast<std::size_t>(cells * users), value) {}

  double& operator()(int j, int k) { return rho[static_cast<std::size_t>(j * users_per_cell + k)]; }
  double operator()(int j, int k) const {
    return rho[static_cast<std::size_t>(j * users_per_cell + k)];
  }
  double cell_sum(int j) const;
};

/// Downlink SINR of every user, flat in (j, k) order:
///   gamma_jk = rho_jk a_jk / (sum_{l,i} rho_li b_lijk + noise).
std::vector<double> sinr(const GainTable& gains, const PowerAllocation& power, double noise_mw);

/// sum_jk log gamma_jk; -inf if any power is zero.
double log_sinr_product(const GainTable& gains, const PowerAllocation& power, double noise_mw);

/// Euclidean projection of `v` onto {x >= 0, sum(x) <= cap}, in place.
void project_capped_simplex(std::span<double> v, double cap);

struct SolverParams {
  int max_iters = 5000;
  /// Stop when the unit-step projected-gradient residual (powers in units of
  /// P_max) falls below this.
  double tolerance = 1e-6;
  /// Initial per-user power as a fraction of P_max / K.
  double initial_fraction = 0.5;
  double armijo = 1e-4;
};

struct SolveResult {
  PowerAllocation power;
  double log_objective = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective value after each accepted step; non-decreasing.
  std::vector<double> trace;
};

/// Maximizes prod_jk gamma_jk subject to sum_k rho_jk <= P_max in every cell
/// by projected gradient ascent on sum_jk log gamma_jk with Barzilai-Borwein
/// trial steps and Armijo backtracking. Never throws on non-convergence:
/// the best iterate is returned with converged == false.
SolveResult solve_max_product(const GainTable& gains, const NetworkConfig& config,
                              const SolverParams& params = {}, bool keep_trace = false);

}  // namespace mimoadv
