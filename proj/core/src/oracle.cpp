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

#include "mimoadv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "mimoadv/errors.hpp"

namespace mimoadv {

double PowerAllocation::cell_sum(int j) const {
  double s = 0.0;
  for (int k = 0; k < users_per_cell; ++k) s += (*this)(j, k);
  return s;
}

std::vector<double> sinr(const GainTable& gains, const PowerAllocation& power, double noise_mw) {
  const int L = gains.num_cells;
  const int K = gains.users_per_cell;
  if (power.num_cells != L || power.users_per_cell != K) {
    throw ValidationError("sinr: power allocation shape does not match gain table");
  }
  std::vector<double> out(static_cast<std::size_t>(L * K));
  for (int j = 0; j < L; ++j) {
    for (int k = 0; k < K; ++k) {
      double denom = noise_mw;
      for (int l = 0; l < L; ++l)
        for (int i = 0; i < K; ++i) denom += power(l, i) * gains.b_at(l, i, j, k);
      out[static_cast<std::size_t>(j * K + k)] = power(j, k) * gains.a_at(j, k) / denom;
    }
  }
  return out;
}

double log_sinr_product(const GainTable& gains, const PowerAllocation& power, double noise_mw) {
  double s = 0.0;
  for (double g : sinr(gains, power, noise_mw)) s += std::log(g);
  return s;
}

void project_capped_simplex(std::span<double> v, double cap) {
  double clipped_sum = 0.0;
  for (double x : v) clipped_sum += std::max(x, 0.0);
  if (clipped_sum <= cap) {
    for (double& x : v) x = std::max(x, 0.0);
    return;
  }
  // Projection onto {x >= 0, sum x = cap}: find tau with sum max(v - tau, 0) = cap.
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    running += sorted[i];
    const double candidate = (running - cap) / static_cast<double>(i + 1);
    if (i + 1 == sorted.size() || sorted[i + 1] <= candidate) {
      tau = candidate;
      break;
    }
  }
  for (double& x : v) x = std::max(x - tau, 0.0);
}

namespace {

// sum_jk log gamma_jk with powers as fractions of P_max and gains scaled by
// P_max / sigma^2. The SINRs are unchanged; the noise term becomes 1.
class LogObjective {
 public:
  LogObjective(const GainTable& gains, double p_max, double noise)
      : L_(gains.num_cells), K_(gains.users_per_cell), n_(static_cast<std::size_t>(L_ * K_)),
        log_a_(n_), b_(gains.b.size()) {
    const double scale = p_max / noise;
    for (std::size_t u = 0; u < n_; ++u) log_a_[u] = std::log(gains.a[u] * scale);
    for (std::size_t i = 0; i < b_.size(); ++i) b_[i] = gains.b[i] * scale;
  }

  std::size_t size() const { return n_; }

  double value(std::span<const double> u, std::vector<double>& denom) const {
    denom.assign(n_, 1.0);
    for (std::size_t src = 0; src < n_; ++src) {
      const double p = u[src];
      if (p == 0.0) continue;
      const double* row = &b_[src * n_];
      for (std::size_t dst = 0; dst < n_; ++dst) denom[dst] += p * row[dst];
    }
    double f = 0.0;
    for (std::size_t d = 0; d < n_; ++d) {
      if (!(u[d] > 0.0)) return -std::numeric_limits<double>::infinity();
      f += std::log(u[d]) + log_a_[d] - std::log(denom[d]);
    }
    return f;
  }

  void gradient(std::span<const double> u, const std::vector<double>& denom,
                std::vector<double>& g) const {
    g.assign(n_, 0.0);
    for (std::size_t src = 0; src < n_; ++src) {
      const double* row = &b_[src * n_];
      double s = 0.0;
      for (std::size_t dst = 0; dst < n_; ++dst) s += row[dst] / denom[dst];
      g[src] = 1.0 / u[src] - s;
    }
  }

  void project(std::vector<double>& u) const {
    for (int j = 0; j < L_; ++j) {
      project_capped_simplex(std::span<double>(u.data() + j * K_, static_cast<std::size_t>(K_)), 1.0);
    }
  }

 private:
  int L_, K_;
  std::size_t n_;
  std::vector<double> log_a_;
  std::vector<double> b_;  // b_[src * n + dst], src = (l,i), dst = (j,k)
};

double norm2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

SolveResult solve_max_product(const GainTable& gains, const NetworkConfig& config,
                              const SolverParams& params, bool keep_trace) {
  const int L = gains.num_cells;
  const int K = gains.users_per_cell;
  const double p_max = config.p_max_mw;
  const double noise = config.noise_mw();
  const LogObjective obj(gains, p_max, noise);
  const std::size_t n = obj.size();

  std::vector<double> u(n, params.initial_fraction / K);
  std::vector<double> denom, g, trial, trial_denom, trial_g, probe;
  double f = obj.value(u, denom);
  obj.gradient(u, denom, g);

  SolveResult result;
  if (keep_trace) result.trace.push_back(f);

  auto residual = [&]() {
    probe.resize(n);
    for (std::size_t i = 0; i < n; ++i) probe[i] = u[i] + g[i];
    obj.project(probe);
    return norm2(probe, u);
  };

  double step = 1e-2;
  double res = residual();
  int it = 0;
  for (; it < params.max_iters && !(res < params.tolerance); ++it) {
    bool accepted = false;
    double t = step;
    for (int halving = 0; halving < 80; ++halving, t *= 0.5) {
      trial.resize(n);
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + t * g[i];
      obj.project(trial);
      const double ft = obj.value(trial, trial_denom);
      if (!std::isfinite(ft)) continue;
      double ascent = 0.0;
      for (std::size_t i = 0; i < n; ++i) ascent += g[i] * (trial[i] - u[i]);
      if (ft >= f + params.armijo * ascent) {
        obj.gradient(trial, trial_denom, trial_g);
        // Barzilai-Borwein step for the next trial (curvature of -f).
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double s = trial[i] - u[i];
          ss += s * s;
          sy += s * (trial_g[i] - g[i]);
        }
        step = sy < 0.0 ? std::clamp(ss / -sy, 1e-12, 1e6) : std::min(2.0 * t, 1e6);
        u.swap(trial);
        denom.swap(trial_denom);
        g.swap(trial_g);
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (keep_trace) result.trace.push_back(f);
    res = residual();
  }

  result.power = PowerAllocation(L, K);
  for (std::size_t i = 0; i < n; ++i) result.power.rho[i] = u[i] * p_max;
  result.log_objective = log_sinr_product(gains, result.power, noise);
  result.gradient_norm = res;
  result.iterations = it;
  result.converged = res < params.tolerance;
  return result;
}

}  // namespace mimoadv
