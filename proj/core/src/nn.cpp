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

#include "mimoadv/nn.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "mimoadv/binary_io.hpp"
#include "mimoadv/errors.hpp"
#include "mimoadv/rng.hpp"

namespace mimoadv {
namespace {

constexpr std::string_view kModelMagic = "MADVMODL";

void apply_activation(Activation act, Eigen::MatrixXd& z) {
  if (act == Activation::kElu) {
    z = z.unaryExpr([](double v) { return v >= 0.0 ? v : std::expm1(v); });
  }
}

// Derivative of the activation given its pre-activation; elu'(0) = 1.
Eigen::MatrixXd activation_derivative(Activation act, const Eigen::MatrixXd& z) {
  if (act == Activation::kElu) {
    return z.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : std::exp(v); });
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

std::vector<LayerSpec> stack_for(ModelId id, int users, int cells) {
  const int in = 2 * users * cells;
  std::vector<int> hidden;
  switch (id) {
    case ModelId::kModel1:
      hidden = {64, 32, 32, 32};
      break;
    case ModelId::kModel2:
      hidden = {512, 256, 128, 128};
      break;
    case ModelId::kCustom:
      throw ValidationError("architecture: kCustom has no fixed layer stack");
  }
  std::vector<LayerSpec> specs;
  int prev = in;
  for (int width : hidden) {
    specs.push_back({prev, width, Activation::kElu, true});
    prev = width;
  }
  specs.push_back({prev, users, Activation::kElu, true});
  specs.push_back({users, users + 1, Activation::kLinear, false});
  return specs;
}

struct AdamState {
  Eigen::MatrixXd mw, vw;
  Eigen::VectorXd mb, vb;
};

}  // namespace

std::string to_string(ModelId id) {
  switch (id) {
    case ModelId::kModel1:
      return "model1";
    case ModelId::kModel2:
      return "model2";
    case ModelId::kCustom:
      return "custom";
  }
  return "unknown";
}

ModelId parse_model_id(const std::string& name) {
  if (name == "model1" || name == "Model1" || name == "m1") return ModelId::kModel1;
  if (name == "model2" || name == "Model2" || name == "m2") return ModelId::kModel2;
  throw ValidationError("unknown model id '" + name + "' (expected model1 or model2)");
}

LossSelector LossSelector::sum_of_powers(int users, int output_dim, double scale) {
  LossSelector s;
  s.weights = Eigen::VectorXd::Zero(output_dim);
  s.weights.head(users).setConstant(scale);
  return s;
}

MlpModel::MlpModel(std::vector<LayerSpec> specs, ModelMeta meta) : meta_(meta) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& s = specs[i];
    if (s.in < 1 || s.out < 1) throw ValidationError("MlpModel: layer dimensions must be positive");
    if (i > 0 && specs[i - 1].out != s.in) {
      throw ValidationError("MlpModel: layer " + std::to_string(i) + " input " + std::to_string(s.in) +
                            " does not match previous output " + std::to_string(specs[i - 1].out));
    }
    layers_.push_back({s, Eigen::MatrixXd::Zero(s.out, s.in), Eigen::VectorXd::Zero(s.out)});
  }
  const int in = input_dim();
  input_shift_ = Eigen::VectorXd::Zero(in);
  input_scale_ = Eigen::VectorXd::Ones(in);
}

void MlpModel::set_input_normalization(Eigen::VectorXd shift, Eigen::VectorXd scale) {
  if (shift.size() != input_dim() || scale.size() != input_dim()) {
    throw ValidationError("set_input_normalization: dimension mismatch");
  }
  if (!shift.allFinite() || !scale.allFinite() || (scale.array() <= 0.0).any()) {
    throw ValidationError("set_input_normalization: scale must be finite and positive");
  }
  input_shift_ = std::move(shift);
  input_scale_ = std::move(scale);
}

Eigen::VectorXd MlpModel::normalized(std::span<const double> x) const {
  const Eigen::Map<const Eigen::VectorXd> raw(x.data(), static_cast<Eigen::Index>(x.size()));
  return (raw - input_shift_).cwiseQuotient(input_scale_);
}

MlpModel MlpModel::architecture(ModelId id, int users_per_cell, int num_cells, ModelMeta meta) {
  meta.id = id;
  MlpModel model(stack_for(id, users_per_cell, num_cells), meta);
  DenseLayer& sum_layer = model.layers_.back();
  sum_layer.weight.topRows(users_per_cell).setIdentity();
  sum_layer.weight.row(users_per_cell).setOnes();
  return model;
}

int MlpModel::input_dim() const { return layers_.empty() ? 0 : layers_.front().spec.in; }
int MlpModel::output_dim() const { return layers_.empty() ? 0 : layers_.back().spec.out; }

std::size_t MlpModel::param_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_)
    if (l.spec.trainable) n += l.spec.param_count();
  return n;
}

std::size_t MlpModel::total_param_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) n += l.spec.param_count();
  return n;
}

void MlpModel::initialize(std::uint64_t seed) {
  Rng rng = make_rng(seed, StreamKind::kTraining, 0);
  for (DenseLayer& l : layers_) {
    if (!l.spec.trainable) continue;
    const double limit = std::sqrt(6.0 / (l.spec.in + l.spec.out));
    boost::random::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill so the stream order matches the file layout.
    for (int r = 0; r < l.weight.rows(); ++r)
      for (int c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = dist(rng);
    l.bias.setZero();
  }
  meta_.seed = seed;
}

Eigen::VectorXd MlpModel::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim()) {
    throw ValidationError("forward: expected input of size " + std::to_string(input_dim()) + ", got " +
                          std::to_string(x.size()));
  }
  Eigen::VectorXd a = normalized(x);
  for (const DenseLayer& l : layers_) {
    Eigen::MatrixXd z = l.weight * a + l.bias;
    apply_activation(l.spec.activation, z);
    a = z;
  }
  return a;
}

Eigen::MatrixXd MlpModel::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim()) throw ValidationError("forward_batch: input dimension mismatch");
  Eigen::MatrixXd a = (inputs.colwise() - input_shift_).array().colwise() / input_scale_.array();
  for (const DenseLayer& l : layers_) {
    Eigen::MatrixXd z = l.weight * a;
    z.colwise() += l.bias;
    apply_activation(l.spec.activation, z);
    a.swap(z);
  }
  return a;
}

std::vector<double> MlpModel::predict_powers(std::span<const double> x) const {
  const Eigen::VectorXd y = forward(x);
  const int users = output_dim() - 1;
  std::vector<double> out(static_cast<std::size_t>(users));
  for (int k = 0; k < users; ++k) out[static_cast<std::size_t>(k)] = y(k) * meta_.output_scale;
  return out;
}

std::vector<double> MlpModel::input_gradient(std::span<const double> x, const LossSelector& loss) const {
  if (static_cast<int>(x.size()) != input_dim()) {
    throw ValidationError("input_gradient: expected input of size " + std::to_string(input_dim()) +
                          ", got " + std::to_string(x.size()));
  }
  if (loss.weights.size() != output_dim()) {
    throw ValidationError("input_gradient: loss selector has wrong dimension");
  }
  std::vector<Eigen::VectorXd> pre;
  pre.reserve(layers_.size());
  Eigen::VectorXd a = normalized(x);
  for (const DenseLayer& l : layers_) {
    Eigen::MatrixXd z = l.weight * a + l.bias;
    pre.push_back(z);
    apply_activation(l.spec.activation, z);
    a = z;
  }
  Eigen::VectorXd delta = loss.weights;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const DenseLayer& l = layers_[i];
    const Eigen::VectorXd dz = delta.cwiseProduct(activation_derivative(l.spec.activation, pre[i]));
    delta = l.weight.transpose() * dz;
  }
  delta = delta.cwiseQuotient(input_scale_);
  return {delta.data(), delta.data() + delta.size()};
}

double mean_squared_error(const MlpModel& model, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets) {
  if (inputs.cols() == 0) return 0.0;
  constexpr Eigen::Index kChunk = 4096;
  double total = 0.0;
  for (Eigen::Index c = 0; c < inputs.cols(); c += kChunk) {
    const Eigen::Index n = std::min(kChunk, inputs.cols() - c);
    const Eigen::MatrixXd y = model.forward_batch(inputs.middleCols(c, n));
    total += (y - targets.middleCols(c, n)).squaredNorm();
  }
  return total / static_cast<double>(targets.size());
}

TrainReport train(MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const TrainParams& params, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  if (inputs.rows() != model.input_dim() || targets.rows() != model.output_dim() ||
      inputs.cols() != targets.cols()) {
    throw ValidationError("train: data dimensions do not match the model");
  }
  if (inputs.cols() < 2) throw ValidationError("train: need at least two samples");
  if (params.batch_size < 1 || params.max_epochs < 0 || params.learning_rate <= 0.0) {
    throw ValidationError("train: invalid hyperparameters");
  }
  const Eigen::Index total = inputs.cols();
  Eigen::Index n_val = static_cast<Eigen::Index>(std::llround(params.validation_fraction * total));
  n_val = std::clamp<Eigen::Index>(n_val, 1, total - 1);
  const Eigen::Index n_train = total - n_val;
  const Eigen::MatrixXd val_x = inputs.rightCols(n_val);
  const Eigen::MatrixXd val_y = targets.rightCols(n_val);

  model.initialize(seed);
  if (params.input_scaling != InputScaling::kNone) {
    const auto train_x = inputs.leftCols(n_train);
    const Eigen::VectorXd mean = train_x.rowwise().mean();
    Eigen::VectorXd stddev = ((train_x.colwise() - mean).array().square().rowwise().sum() /
                              static_cast<double>(n_train))
                                 .sqrt()
                                 .matrix();
    for (Eigen::Index i = 0; i < stddev.size(); ++i)
      if (!(stddev(i) > 1e-12)) stddev(i) = 1.0;
    if (params.input_scaling == InputScaling::kFixed) {
      model.set_input_normalization(mean, stddev);
    } else {
      DenseLayer& first = model.mutable_layers().front();
      first.weight = first.weight * stddev.cwiseInverse().asDiagonal();
      first.bias = -first.weight * mean;
    }
  }
  const Eigen::MatrixXd norm_x =
      (inputs.colwise() - model.input_shift()).array().colwise() / model.input_scale().array();
  std::vector<DenseLayer>& layers = model.mutable_layers();
  const std::size_t depth = layers.size();

  std::vector<AdamState> adam(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    adam[i].mw = Eigen::MatrixXd::Zero(layers[i].weight.rows(), layers[i].weight.cols());
    adam[i].vw = adam[i].mw;
    adam[i].mb = Eigen::VectorXd::Zero(layers[i].bias.size());
    adam[i].vb = adam[i].mb;
  }

  TrainReport report;
  report.seed = seed;
  report.initial_validation_mse = mean_squared_error(model, val_x, val_y);
  double best_val = report.initial_validation_mse;
  std::vector<DenseLayer> best_layers = layers;

  Rng rng = make_rng(seed, StreamKind::kTraining, 1);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_train));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  std::vector<Eigen::MatrixXd> pre(depth), act(depth + 1);
  Eigen::MatrixXd batch_x, batch_y;
  long long step = 0;
  int since_best = 0;

  for (int epoch = 1; epoch <= params.max_epochs; ++epoch) {
    // Fisher-Yates with a portable integer distribution.
    for (std::size_t i = order.size(); i > 1; --i) {
      boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    for (Eigen::Index start = 0; start < n_train; start += params.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(params.batch_size, n_train - start);
      batch_x.resize(inputs.rows(), b);
      batch_y.resize(targets.rows(), b);
      for (Eigen::Index c = 0; c < b; ++c) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + c)];
        batch_x.col(c) = norm_x.col(src);
        batch_y.col(c) = targets.col(src);
      }
      act[0] = batch_x;
      for (std::size_t i = 0; i < depth; ++i) {
        pre[i] = layers[i].weight * act[i];
        pre[i].colwise() += layers[i].bias;
        act[i + 1] = pre[i];
        apply_activation(layers[i].spec.activation, act[i + 1]);
      }
      Eigen::MatrixXd delta = (act[depth] - batch_y) * (2.0 / static_cast<double>(batch_y.size()));
      if (!delta.allFinite()) {
        throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch));
      }
      ++step;
      const double lr_t = params.learning_rate * std::sqrt(1.0 - std::pow(params.beta2, step)) /
                          (1.0 - std::pow(params.beta1, step));
      for (std::size_t i = depth; i-- > 0;) {
        const Eigen::MatrixXd dz =
            delta.cwiseProduct(activation_derivative(layers[i].spec.activation, pre[i]));
        if (i > 0) delta = layers[i].weight.transpose() * dz;
        if (!layers[i].spec.trainable) continue;
        const Eigen::MatrixXd gw = dz * act[i].transpose();
        const Eigen::VectorXd gb = dz.rowwise().sum();
        AdamState& s = adam[i];
        s.mw = params.beta1 * s.mw + (1.0 - params.beta1) * gw;
        s.vw = params.beta2 * s.vw + (1.0 - params.beta2) * gw.cwiseAbs2();
        s.mb = params.beta1 * s.mb + (1.0 - params.beta1) * gb;
        s.vb = params.beta2 * s.vb + (1.0 - params.beta2) * gb.cwiseAbs2();
        layers[i].weight.array() -= lr_t * s.mw.array() / (s.vw.array().sqrt() + params.adam_epsilon);
        layers[i].bias.array() -= lr_t * s.mb.array() / (s.vb.array().sqrt() + params.adam_epsilon);
      }
    }
    const double val = mean_squared_error(model, val_x, val_y);
    if (!std::isfinite(val)) {
      throw TrainingError("train: validation loss became non-finite at epoch " + std::to_string(epoch));
    }
    report.epochs = epoch;
    if (val < best_val) {
      best_val = val;
      best_layers = layers;
      report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= params.patience) {
      break;
    }
  }
  layers = best_layers;
  report.validation_mse = best_val;
  report.train_mse = mean_squared_error(model, inputs.leftCols(n_train), targets.leftCols(n_train));
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  BinaryWriter w(out);
  const ModelMeta& m = model.meta();
  w.magic(kModelMagic);
  w.u32(kModelSchemaVersion);
  w.u32(static_cast<std::uint32_t>(m.id));
  w.u32(static_cast<std::uint32_t>(m.precoder));
  w.u64(m.seed);
  w.u64(m.config_hash);
  w.u32(static_cast<std::uint32_t>(m.cell));
  w.f64(m.output_scale);
  w.u32(static_cast<std::uint32_t>(model.layers().size()));
  for (const DenseLayer& l : model.layers()) {
    w.u32(static_cast<std::uint32_t>(l.spec.in));
    w.u32(static_cast<std::uint32_t>(l.spec.out));
    w.u32(static_cast<std::uint32_t>(l.spec.activation));
    w.u32(l.spec.trainable ? 1u : 0u);
  }
  w.f64s(std::span<const double>(model.input_shift().data(), static_cast<std::size_t>(model.input_dim())));
  w.f64s(std::span<const double>(model.input_scale().data(), static_cast<std::size_t>(model.input_dim())));
  for (const DenseLayer& l : model.layers()) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = l.weight;
    w.f64s(std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())));
    w.f64s(std::span<const double>(l.bias.data(), static_cast<std::size_t>(l.bias.size())));
  }
  if (!out) throw Error("write failed: " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string what = path.string();
  BinaryReader r(in, what);
  r.expect_magic(kModelMagic);
  const std::uint32_t version = r.u32();
  if (version != kModelSchemaVersion) {
    throw VersionError(what + ": model schema " + std::to_string(version) + " (expected " +
                       std::to_string(kModelSchemaVersion) + ")");
  }
  ModelMeta meta;
  const std::uint32_t id = r.u32();
  const std::uint32_t precoder = r.u32();
  if (id > 2 || precoder > 1) throw FormatError(what + ": bad enum field");
  meta.id = static_cast<ModelId>(id);
  meta.precoder = static_cast<Precoder>(precoder);
  meta.seed = r.u64();
  meta.config_hash = r.u64();
  meta.cell = static_cast<std::int32_t>(r.u32());
  meta.output_scale = r.f64();
  const std::uint32_t count = r.u32();
  if (count == 0 || count > 256) throw FormatError(what + ": implausible layer count");
  std::vector<LayerSpec> specs;
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerSpec s;
    s.in = static_cast<int>(r.u32());
    s.out = static_cast<int>(r.u32());
    const std::uint32_t act = r.u32();
    const std::uint32_t trainable = r.u32();
    if (s.in < 1 || s.out < 1 || s.in > (1 << 20) || s.out > (1 << 20) || act > 1 || trainable > 1) {
      throw FormatError(what + ": bad layer header");
    }
    s.activation = static_cast<Activation>(act);
    s.trainable = trainable == 1;
    specs.push_back(s);
  }
  MlpModel model;
  try {
    model = MlpModel(specs, meta);
  } catch (const ValidationError& e) {
    throw FormatError(what + ": " + e.what());
  }
  Eigen::VectorXd shift(model.input_dim()), scale(model.input_dim());
  r.f64s(std::span<double>(shift.data(), static_cast<std::size_t>(shift.size())));
  r.f64s(std::span<double>(scale.data(), static_cast<std::size_t>(scale.size())));
  try {
    model.set_input_normalization(std::move(shift), std::move(scale));
  } catch (const ValidationError& e) {
    throw FormatError(what + ": " + e.what());
  }
  for (DenseLayer& l : model.mutable_layers()) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(l.spec.out, l.spec.in);
    r.f64s(std::span<double>(rm.data(), static_cast<std::size_t>(rm.size())));
    l.weight = rm;
    r.f64s(std::span<double>(l.bias.data(), static_cast<std::size_t>(l.bias.size())));
  }
  r.expect_end();
  return model;
}

}  // namespace mimoadv
