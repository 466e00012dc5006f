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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mimoadv/channel.hpp"

namespace mimoadv {

inline constexpr std::uint32_t kModelSchemaVersion = 1;

enum class Activation : std::uint32_t { kLinear = 0, kElu = 1 };

/// Model1 / Model2 are the two fixed per-cell regressors; kCustom is any
/// other stack (used by tests).
enum class ModelId : std::uint32_t { kCustom = 0, kModel1 = 1, kModel2 = 2 };

std::string to_string(ModelId id);
ModelId parse_model_id(const std::string& name);

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation activation = Activation::kLinear;
  bool trainable = true;

  std::size_t param_count() const {
    return static_cast<std::size_t>(in) * static_cast<std::size_t>(out) + static_cast<std::size_t>(out);
  }
};

struct DenseLayer {
  LayerSpec spec;
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

struct ModelMeta {
  ModelId id = ModelId::kCustom;
  Precoder precoder = Precoder::kMr;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::int32_t cell = -1;
  /// Network outputs are powers divided by this (P_max in mW).
  double output_scale = 1.0;
};

/// Scalar attack/analysis loss as a fixed linear functional of the outputs.
struct LossSelector {
  Eigen::VectorXd weights;

  /// sum of the first `users` outputs, each multiplied by `scale`.
  static LossSelector sum_of_powers(int users, int output_dim, double scale);
};

/// Fully connected feed-forward regressor. Layers are applied in order;
/// immutable after training so forward passes are safe to share.
class MlpModel {
 public:
  MlpModel() = default;
  /// Zero-initialized model with the given layer stack.
  MlpModel(std::vector<LayerSpec> specs, ModelMeta meta);

  /// The fixed Model1 / Model2 stacks for K users and L cells:
  ///   2KL -> 64 -> 32 -> 32 -> 32 -> K -> K+1        (Model1)
  ///   2KL -> 512 -> 256 -> 128 -> 128 -> K -> K+1    (Model2)
  /// ELU on every hidden layer. The last layer is frozen to [I; 1^T] with
  /// zero bias: it passes the K powers through and appends their sum.
  static MlpModel architecture(ModelId id, int users_per_cell, int num_cells, ModelMeta meta = {});

  int input_dim() const;
  int output_dim() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  const ModelMeta& meta() const { return meta_; }
  ModelMeta& mutable_meta() { return meta_; }

  /// Trainable parameters only.
  std::size_t param_count() const;
  /// Including frozen layers.
  std::size_t total_param_count() const;

  /// Glorot-uniform weights and zero biases for trainable layers.
  void initialize(std::uint64_t seed);

  /// Fixed affine preprocessing x -> (x - shift) / scale applied before the
  /// first layer; part of the model, so gradients are still in input units.
  /// Defaults to the identity.
  void set_input_normalization(Eigen::VectorXd shift, Eigen::VectorXd scale);
  const Eigen::VectorXd& input_shift() const { return input_shift_; }
  const Eigen::VectorXd& input_scale() const { return input_scale_; }

  /// Raw (normalized) outputs. Throws ValidationError on a size mismatch.
  Eigen::VectorXd forward(std::span<const double> x) const;
  /// One sample per column.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;
  /// First K outputs scaled back to mW.
  std::vector<double> predict_powers(std::span<const double> x) const;

  /// Gradient of loss.weights . forward(x) with respect to x (reverse mode).
  std::vector<double> input_gradient(std::span<const double> x, const LossSelector& loss) const;

 private:
  Eigen::VectorXd normalized(std::span<const double> x) const;

  std::vector<DenseLayer> layers_;
  Eigen::VectorXd input_shift_;
  Eigen::VectorXd input_scale_;
  ModelMeta meta_;
};

/// Number of users served per cell by a model, i.e. output_dim - 1.
inline int users_of(const MlpModel& model) { return model.output_dim() - 1; }

/// How raw metre inputs are conditioned for training.
enum class InputScaling : std::uint32_t {
  /// Plain Glorot init on raw inputs.
  kNone = 0,
  /// Raw inputs; the first layer's initial weights and bias absorb the
  /// training-split mean / std, so training starts well conditioned but the
  /// weights stay free.
  kFoldedInit = 1,
  /// A fixed standardization stored with the model (set_input_normalization).
  kFixed = 2,
};

struct TrainParams {
  InputScaling input_scaling = InputScaling::kFixed;
  double learning_rate = 1e-3;
  int batch_size = 128;
  int max_epochs = 200;
  /// Epochs without validation improvement before stopping.
  int patience = 10;
  double validation_fraction = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-7;
};

struct TrainReport {
  int epochs = 0;
  int best_epoch = 0;
  double initial_validation_mse = 0.0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

/// Adam on mean squared error over every output. Samples are columns of
/// `inputs` / `targets`; the last validation_fraction of columns is held
/// out. Keeps the weights of the best validation epoch. Deterministic given
/// `seed`. Throws TrainingError if the loss becomes non-finite.
TrainReport train(MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const TrainParams& params, std::uint64_t seed);

double mean_squared_error(const MlpModel& model, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets);

/// Binary layout (little-endian): magic "MADVMODL", u32 schema_version,
/// u32 model_id, u32 precoder, u64 seed, u64 config hash, i32 cell (as u32),
/// f64 output_scale, u32 layer count, per layer {u32 in, u32 out,
/// u32 activation, u32 trainable}, the input shift and scale vectors, then
/// per layer the weights row-major followed by the biases as f64.
void save_model(const MlpModel& model, const std::filesystem::path& path);
/// Throws FormatError on corrupt or truncated files and VersionError on a
/// foreign schema version.
MlpModel load_model(const std::filesystem::path& path);

}  // namespace mimoadv
