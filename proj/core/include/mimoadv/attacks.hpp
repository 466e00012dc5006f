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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mimoadv/nn.hpp"
#include "mimoadv/rng.hpp"
#include "mimoadv/scenario.hpp"

namespace mimoadv {

enum class AttackMethod { kFgsm, kPgd, kMiFgsm, kRandom };

std::string to_string(AttackMethod method);
AttackMethod parse_attack_method(const std::string& name);

struct AttackConfig {
  AttackMethod method = AttackMethod::kFgsm;
  /// L-infinity radius in input units (metres).
  double epsilon = 0.0;
  double pgd_step = 0.01;
  int pgd_iterations = 40;
  double momentum = 0.1;
  int mi_iterations = 10;
  std::uint64_t seed = 0;
  /// Clamp adversarial positions to the user's cell (off by default).
  bool clamp_to_cells = false;

  /// Per-iteration step of MI-FGSM: epsilon / mi_iterations.
  double mi_step() const { return epsilon / mi_iterations; }
  void validate() const;
};

/// Forward-only view of a model. Black-box evaluation receives the victim
/// through this type, so no code path on the victim side can take gradients.
class ForwardOnlyModel {
 public:
  explicit ForwardOnlyModel(const MlpModel& model) : model_(&model) {}
  std::vector<double> predict_powers(std::span<const double> x) const {
    return model_->predict_powers(x);
  }
  double p_max() const { return model_->meta().output_scale; }

 private:
  const MlpModel* model_;
};

struct AdversarialSample {
  int cell = 0;
  std::vector<double> clean;
  std::vector<double> adversarial;
  std::vector<double> clean_power;
  std::vector<double> adversarial_power;
  double clean_sum = 0.0;
  double adversarial_sum = 0.0;
  double linf = 0.0;
  bool feasible = true;
};

/// epsilon = d / sqrt(2).
double epsilon_from_distance(double d_eps_m);

/// sign with sign(0) = 0.
inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Sum of the first K predicted powers in mW; the quantity every attack ascends.
double attack_loss(const MlpModel& model, std::span<const double> x);

/// x + eps * sign(grad).
std::vector<double> craft_fgsm(const MlpModel& model, std::span<const double> x, double epsilon);
/// Iterated steps of size cfg.pgd_step, clipped to the eps-box after each step.
std::vector<double> craft_pgd(const MlpModel& model, std::span<const double> x,
                              const AttackConfig& cfg);
/// L1-normalized gradient momentum, step eps / I, no per-step clipping.
std::vector<double> craft_mifgsm(const MlpModel& model, std::span<const double> x,
                                 const AttackConfig& cfg);
/// x + eps * sign(w), w ~ N(0, I).
std::vector<double> craft_random(std::span<const double> x, double epsilon, Rng& rng);

/// Dispatches on cfg.method. `rng` is only consumed by kRandom.
std::vector<double> craft(const MlpModel& gradient_source, std::span<const double> x,
                          const AttackConfig& cfg, Rng& rng);

/// Clamps every user coordinate back into its own cell rectangle.
void clamp_to_layout(std::vector<double>& x, const CellLayout& layout, int users_per_cell);

/// Scores a crafted input on `judge`: infeasible iff the predicted powers of
/// the cell sum to more than P_max.
AdversarialSample assess(const ForwardOnlyModel& judge, int cell, std::span<const double> clean,
                         std::vector<double> adversarial);

/// White-box conveniences: craft on `model` and judge on the same model.
AdversarialSample attack_fgsm(const MlpModel& model, std::span<const double> x, int cell,
                              double epsilon);
AdversarialSample attack_pgd(const MlpModel& model, std::span<const double> x, int cell,
                             const AttackConfig& cfg);
AdversarialSample attack_mifgsm(const MlpModel& model, std::span<const double> x, int cell,
                                const AttackConfig& cfg);
AdversarialSample attack_random(const MlpModel& model, std::span<const double> x, int cell,
                                double epsilon, Rng& rng);

}  // namespace mimoadv
