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

#include "mimoadv/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "mimoadv/errors.hpp"

namespace mimoadv {
namespace {

std::vector<double> loss_gradient(const MlpModel& model, std::span<const double> x) {
  const LossSelector loss =
      LossSelector::sum_of_powers(users_of(model), model.output_dim(), model.meta().output_scale);
  return model.input_gradient(x, loss);
}

double linf_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

std::string to_string(AttackMethod method) {
  switch (method) {
    case AttackMethod::kFgsm:
      return "fgsm";
    case AttackMethod::kPgd:
      return "pgd";
    case AttackMethod::kMiFgsm:
      return "mifgsm";
    case AttackMethod::kRandom:
      return "random";
  }
  return "unknown";
}

AttackMethod parse_attack_method(const std::string& name) {
  if (name == "fgsm") return AttackMethod::kFgsm;
  if (name == "pgd") return AttackMethod::kPgd;
  if (name == "mifgsm" || name == "mi-fgsm") return AttackMethod::kMiFgsm;
  if (name == "random") return AttackMethod::kRandom;
  throw ValidationError("unknown attack method '" + name + "' (expected fgsm, pgd, mifgsm or random)");
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ValidationError("attack: epsilon must be >= 0");
  if (!(pgd_step > 0.0)) throw ValidationError("attack: PGD step must be > 0");
  if (pgd_iterations < 1) throw ValidationError("attack: PGD iterations must be >= 1");
  if (mi_iterations < 1) throw ValidationError("attack: MI-FGSM iterations must be >= 1");
  if (!(momentum >= 0.0 && momentum <= 1.0)) throw ValidationError("attack: momentum must be in [0, 1]");
}

double epsilon_from_distance(double d_eps_m) {
  if (!(d_eps_m >= 0.0)) throw ValidationError("epsilon_from_distance: distance must be >= 0");
  return d_eps_m / std::sqrt(2.0);
}

double attack_loss(const MlpModel& model, std::span<const double> x) {
  double s = 0.0;
  for (double p : model.predict_powers(x)) s += p;
  return s;
}

std::vector<double> craft_fgsm(const MlpModel& model, std::span<const double> x, double epsilon) {
  const std::vector<double> g = loss_gradient(model, x);
  std::vector<double> adv(x.begin(), x.end());
  for (std::size_t i = 0; i < adv.size(); ++i) adv[i] += epsilon * sign0(g[i]);
  return adv;
}

std::vector<double> craft_pgd(const MlpModel& model, std::span<const double> x, const AttackConfig& cfg) {
  cfg.validate();
  std::vector<double> cur(x.begin(), x.end());
  for (int q = 0; q < cfg.pgd_iterations; ++q) {
    const std::vector<double> g = loss_gradient(model, cur);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double stepped = cur[i] + cfg.pgd_step * sign0(g[i]);
      cur[i] = std::clamp(stepped, x[i] - cfg.epsilon, x[i] + cfg.epsilon);
    }
  }
  return cur;
}

std::vector<double> craft_mifgsm(const MlpModel& model, std::span<const double> x,
                                 const AttackConfig& cfg) {
  cfg.validate();
  const double beta = cfg.mi_step();
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> momentum(x.size(), 0.0);
  for (int it = 0; it < cfg.mi_iterations; ++it) {
    const std::vector<double> g = loss_gradient(model, cur);
    double l1 = 0.0;
    for (double v : g) l1 += std::abs(v);
    // A zero gradient leaves the momentum untouched.
    if (l1 > 0.0) {
      for (std::size_t i = 0; i < momentum.size(); ++i) {
        momentum[i] = cfg.momentum * momentum[i] + g[i] / l1;
      }
    }
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += beta * sign0(momentum[i]);
  }
  return cur;
}

std::vector<double> craft_random(std::span<const double> x, double epsilon, Rng& rng) {
  std::vector<double> adv(x.begin(), x.end());
  for (double& v : adv) v += epsilon * sign0(standard_normal(rng));
  return adv;
}

std::vector<double> craft(const MlpModel& gradient_source, std::span<const double> x,
                          const AttackConfig& cfg, Rng& rng) {
  cfg.validate();
  switch (cfg.method) {
    case AttackMethod::kFgsm:
      return craft_fgsm(gradient_source, x, cfg.epsilon);
    case AttackMethod::kPgd:
      return craft_pgd(gradient_source, x, cfg);
    case AttackMethod::kMiFgsm:
      return craft_mifgsm(gradient_source, x, cfg);
    case AttackMethod::kRandom:
      return craft_random(x, cfg.epsilon, rng);
  }
  throw ValidationError("craft: unknown method");
}

void clamp_to_layout(std::vector<double>& x, const CellLayout& layout, int users_per_cell) {
  for (std::size_t c = 0; c < layout.cells.size(); ++c) {
    const CellRect& r = layout.cells[c];
    for (int k = 0; k < users_per_cell; ++k) {
      const std::size_t i = 2 * (c * static_cast<std::size_t>(users_per_cell) + static_cast<std::size_t>(k));
      x[i] = std::clamp(x[i], r.x_min, r.x_max);
      x[i + 1] = std::clamp(x[i + 1], r.y_min, r.y_max);
    }
  }
}

AdversarialSample assess(const ForwardOnlyModel& judge, int cell, std::span<const double> clean,
                         std::vector<double> adversarial) {
  AdversarialSample s;
  s.cell = cell;
  s.clean.assign(clean.begin(), clean.end());
  s.clean_power = judge.predict_powers(clean);
  s.adversarial_power = judge.predict_powers(adversarial);
  for (double p : s.clean_power) s.clean_sum += p;
  for (double p : s.adversarial_power) s.adversarial_sum += p;
  s.linf = linf_distance(clean, adversarial);
  s.feasible = !(s.adversarial_sum > judge.p_max());
  s.adversarial = std::move(adversarial);
  return s;
}

AdversarialSample attack_fgsm(const MlpModel& model, std::span<const double> x, int cell, double epsilon) {
  AttackConfig cfg;
  cfg.epsilon = epsilon;
  cfg.validate();
  return assess(ForwardOnlyModel(model), cell, x, craft_fgsm(model, x, epsilon));
}

AdversarialSample attack_pgd(const MlpModel& model, std::span<const double> x, int cell,
                             const AttackConfig& cfg) {
  return assess(ForwardOnlyModel(model), cell, x, craft_pgd(model, x, cfg));
}

AdversarialSample attack_mifgsm(const MlpModel& model, std::span<const double> x, int cell,
                                const AttackConfig& cfg) {
  return assess(ForwardOnlyModel(model), cell, x, craft_mifgsm(model, x, cfg));
}

AdversarialSample attack_random(const MlpModel& model, std::span<const double> x, int cell,
                                double epsilon, Rng& rng) {
  return assess(ForwardOnlyModel(model), cell, x, craft_random(x, epsilon, rng));
}

}  // namespace mimoadv
