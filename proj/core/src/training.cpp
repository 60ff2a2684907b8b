// Copyright 2026 The lrplab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lrplab/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "lrplab/csv_io.hpp"
#include "lrplab/error.hpp"
#include "lrplab/rng.hpp"

namespace lrplab {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate", "must be > 0");
  if (epochs < 1) throw ConfigError("train.epochs", "must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size", "must be >= 1");
  if (!(l1_coeff >= 0.0)) throw ConfigError("train.l1", "must be >= 0");
}

namespace {

// Visits (data, size, penalized) for every parameter block in flat order.
template <typename F>
void for_each_block(const std::vector<DenseLayer>& layers, F&& f) {
  for (const DenseLayer& layer : layers) {
    f(layer.weights.data(), layer.weights.size(), true);
    f(layer.bias.data(), layer.bias.size(), false);
  }
}

template <typename F>
void for_each_block(const MlpModel& model, F&& f) {
  for_each_block(model.layers, f);
}

template <typename F>
void for_each_block(const ConvModel& model, F&& f) {
  for (const ConvStage& stage : model.stages) {
    f(stage.kernels.data(), stage.kernels.size(), true);
    f(stage.bias.data(), stage.bias.size(), false);
  }
  for_each_block(model.head, f);
}

template <typename M>
Eigen::VectorXd gather(const M& model) {
  Eigen::VectorXd out(count_parameters(model));
  Eigen::Index off = 0;
  for_each_block(model, [&](const double* data, Eigen::Index n, bool) {
    std::copy(data, data + n, out.data() + off);
    off += n;
  });
  return out;
}

template <typename M>
void scatter(M& model, const Eigen::VectorXd& params) {
  if (params.size() != count_parameters(model)) {
    throw ShapeError("parameter vector has " + std::to_string(params.size()) +
                     " entries, model has " + std::to_string(count_parameters(model)));
  }
  Eigen::Index off = 0;
  // Blocks are visited through const pointers; the model itself is mutable.
  for_each_block(std::as_const(model), [&](const double* data, Eigen::Index n, bool) {
    std::copy(params.data() + off, params.data() + off + n, const_cast<double*>(data));
    off += n;
  });
}

template <typename M>
Eigen::VectorXd make_penalty_mask(const M& model) {
  Eigen::VectorXd out(count_parameters(model));
  Eigen::Index off = 0;
  for_each_block(model, [&](const double*, Eigen::Index n, bool penalized) {
    out.segment(off, n).setConstant(penalized ? 1.0 : 0.0);
    off += n;
  });
  return out;
}

template <typename M>
double weight_l1(const M& model) {
  double sum = 0.0;
  for_each_block(model, [&](const double* data, Eigen::Index n, bool penalized) {
    if (!penalized) return;
    for (Eigen::Index i = 0; i < n; ++i) sum += std::abs(data[i]);
  });
  return sum;
}

// Backprop through a dense stack whose records start at `first_record`.
// `offset` is the flat position of the stack's first parameter. Returns dY
// with respect to the stack input.
Eigen::VectorXd backprop_dense(const std::vector<DenseLayer>& layers,
                               const LayerTrace& trace, std::size_t first_record,
                               Eigen::Index offset, double scale,
                               Eigen::VectorXd& grad) {
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = offset;
  for (const DenseLayer& layer : layers) {
    offsets.push_back(off);
    off += layer.weights.size() + layer.bias.size();
  }
  Eigen::VectorXd delta = Eigen::VectorXd::Ones(1);
  for (std::size_t li = layers.size(); li-- > 0;) {
    const DenseLayer& layer = layers[li];
    const LayerRecord& rec = trace.layers[first_record + li];
    Eigen::VectorXd dz(layer.outputs());
    for (int j = 0; j < layer.outputs(); ++j) {
      dz[j] = delta[j] * activate_grad(layer.activation, rec.output[j]);
    }
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets[li], layer.outputs(),
                                   layer.inputs());
    gw.noalias() += scale * dz * rec.input.transpose();
    grad.segment(offsets[li] + layer.weights.size(), layer.outputs()) += scale * dz;
    delta = layer.weights.transpose() * dz;
  }
  return delta;
}

}  // namespace

Eigen::VectorXd get_parameters(const MlpModel& model) { return gather(model); }
Eigen::VectorXd get_parameters(const ConvModel& model) { return gather(model); }
void set_parameters(MlpModel& model, const Eigen::VectorXd& p) { scatter(model, p); }
void set_parameters(ConvModel& model, const Eigen::VectorXd& p) { scatter(model, p); }
Eigen::VectorXd penalty_mask(const MlpModel& model) { return make_penalty_mask(model); }
Eigen::VectorXd penalty_mask(const ConvModel& model) { return make_penalty_mask(model); }
double l1_norm(const MlpModel& model) { return weight_l1(model); }
double l1_norm(const ConvModel& model) { return weight_l1(model); }

void accumulate_gradient(const MlpModel& model, const LayerTrace& trace,
                         double scale, Eigen::VectorXd& grad) {
  if (trace.layers.size() != model.layers.size()) throw ShapeError("trace does not match model");
  backprop_dense(model.layers, trace, 0, 0, scale, grad);
}

void accumulate_gradient(const ConvModel& model, const LayerTrace& trace,
                         double scale, Eigen::VectorXd& grad) {
  if (trace.layers.size() != model.stages.size() + model.head.size()) {
    throw ShapeError("trace does not match model");
  }
  Eigen::Index head_offset = 0;
  std::vector<Eigen::Index> stage_offsets;
  for (const ConvStage& s : model.stages) {
    stage_offsets.push_back(head_offset);
    head_offset += s.kernels.size() + s.bias.size();
  }
  Eigen::VectorXd delta = backprop_dense(model.head, trace, model.stages.size(),
                                         head_offset, scale, grad);

  std::vector<Shape3> shapes{model.input};
  for (const ConvStage& s : model.stages) shapes.push_back(s.output_shape(shapes.back()));

  for (std::size_t si = model.stages.size(); si-- > 0;) {
    const ConvStage& stage = model.stages[si];
    const LayerRecord& rec = trace.layers[si];
    const Shape3& in = shapes[si];
    const Shape3& out = shapes[si + 1];
    const int k = stage.kernel;
    Eigen::VectorXd dz(out.size());
    for (Eigen::Index i = 0; i < dz.size(); ++i) {
      dz[i] = delta[i] * activate_grad(stage.activation, rec.output[i]);
    }
    Eigen::Map<Eigen::MatrixXd> gk(grad.data() + stage_offsets[si], stage.out_channels,
                                   stage.in_channels * k * k);
    Eigen::VectorXd d_in = Eigen::VectorXd::Zero(in.size());
    for (int o = 0; o < out.channels; ++o) {
      double db = 0.0;
      for (int y = 0; y < out.rows; ++y) {
        for (int x = 0; x < out.cols; ++x) {
          const double g = dz[(o * out.rows + y) * out.cols + x];
          if (g == 0.0) continue;
          db += g;
          for (int c = 0; c < in.channels; ++c) {
            for (int i = 0; i < k; ++i) {
              for (int j = 0; j < k; ++j) {
                const Eigen::Index idx =
                    (c * in.rows + y * stage.stride + i) * in.cols + x * stage.stride + j;
                gk(o, (c * k + i) * k + j) += scale * g * rec.input[idx];
                d_in[idx] += stage.weight(o, c, i, j) * g;
              }
            }
          }
        }
      }
      grad[stage_offsets[si] + stage.kernels.size() + o] += scale * db;
    }
    delta = std::move(d_in);
  }
}

Eigen::VectorXd model_input(const MlpModel& model, const GridSample& sample) {
  FlatVector flat = flatten_valid(sample);
  if (flat.values.size() != model.input_width()) {
    throw ShapeError("sample has " + std::to_string(flat.values.size()) +
                     " valid cells, MLP expects " + std::to_string(model.input_width()));
  }
  return std::move(flat.values);
}

Eigen::VectorXd model_input(const ConvModel& model, const GridSample& sample) {
  if (model.stages.empty()) throw ShapeError("CNN has no conv stage");
  const ConvStage& first = model.stages.front();
  PaddedGrid padded = pad_for_conv(sample, first.kernel, first.stride);
  if (padded.values.rows() != model.input.rows || padded.values.cols() != model.input.cols) {
    throw ShapeError("padded sample does not match CNN input geometry");
  }
  return Eigen::Map<const Eigen::VectorXd>(padded.values.data(),
                                           static_cast<Eigen::Index>(padded.values.size()));
}

namespace {

ForwardResult forward(const MlpModel& m, const Eigen::VectorXd& x) { return mlp_forward(m, x); }
ForwardResult forward(const ConvModel& m, const Eigen::VectorXd& x) { return conv_forward(m, x); }

template <typename M>
TrainResult<M> train_impl(M model, const GridDataset& train, const TrainConfig& config) {
  config.validate();
  model.validate();
  if (train.empty()) throw ConfigError("train", "training dataset is empty");

  std::vector<Eigen::VectorXd> inputs;
  std::vector<double> targets;
  inputs.reserve(train.size());
  for (const GridSample& s : train.samples()) {
    inputs.push_back(model_input(model, s));
    targets.push_back(s.target);
  }

  Eigen::VectorXd theta = get_parameters(model);
  const Eigen::VectorXd mask = penalty_mask(model);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd grad(theta.size());
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-7;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);

  TrainResult<M> result{std::move(model), {}};
  M& net = result.model;
  const std::size_t n = order.size();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<int>(order));
    double sq_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const double inv = 1.0 / static_cast<double>(stop - start);
      grad.setZero();
      for (std::size_t b = start; b < stop; ++b) {
        const int i = order[b];
        ForwardResult fw = forward(net, inputs[i]);
        const double err = fw.prediction - targets[i];
        sq_sum += err * err;
        accumulate_gradient(net, fw.trace, 2.0 * err * inv, grad);
      }
      if (config.l1_coeff > 0.0) {
        // Subgradient of |w| is taken as 0 at w = 0.
        grad.array() += config.l1_coeff * mask.array() * theta.array().sign();
      }
      if (config.optimizer == Optimizer::kAdam) {
        beta1_pow *= kBeta1;
        beta2_pow *= kBeta2;
        m1 = kBeta1 * m1 + (1.0 - kBeta1) * grad;
        m2 = kBeta2 * m2 + (1.0 - kBeta2) * grad.cwiseAbs2();
        const double lr = config.learning_rate * std::sqrt(1.0 - beta2_pow) / (1.0 - beta1_pow);
        theta.array() -= lr * m1.array() / (m2.array().sqrt() + kEps);
      } else {
        theta -= config.learning_rate * grad;
      }
      set_parameters(net, theta);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mse = sq_sum / static_cast<double>(n);
    rec.l1_penalty = config.l1_coeff * weight_l1(net);
    rec.total = rec.mse + rec.l1_penalty;
    if (!std::isfinite(rec.total) || !theta.allFinite()) {
      throw TrainingError(epoch, "loss is not finite");
    }
    result.history.push_back(rec);
  }
  return result;
}

}  // namespace

TrainResult<MlpModel> train_feedforward(MlpModel model, const GridDataset& train,
                                        const TrainConfig& config) {
  return train_impl(std::move(model), train, config);
}

TrainResult<ConvModel> train_feedforward(ConvModel model, const GridDataset& train,
                                         const TrainConfig& config) {
  return train_impl(std::move(model), train, config);
}

void write_loss_history(const std::filesystem::path& path,
                        std::span<const EpochRecord> history) {
  std::vector<std::vector<double>> rows;
  rows.reserve(history.size());
  for (const EpochRecord& r : history) {
    rows.push_back({static_cast<double>(r.epoch), r.mse, r.l1_penalty, r.total});
  }
  csv::write_table(path, {"epoch", "mse", "l1_penalty", "total"}, rows);
}

Readout fit_readout(const Eigen::MatrixXd& final_states,
                    const Eigen::VectorXd& targets, double ridge) {
  if (!(ridge >= 0.0)) throw ConfigError("esn.ridge", "must be >= 0");
  if (final_states.rows() != targets.size()) throw ShapeError("one target per state row required");
  if (final_states.rows() == 0) throw ConfigError("train", "training dataset is empty");
  const Eigen::Index n = final_states.rows();
  const Eigen::Index d = final_states.cols();
  Eigen::MatrixXd design(n, d + 1);
  design.leftCols(d) = final_states;
  design.col(d).setOnes();
  Eigen::MatrixXd normal = design.transpose() * design;
  normal.diagonal().head(d).array() += ridge;
  const Eigen::VectorXd rhs = design.transpose() * targets;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  const double scale = std::max(pivots.maxCoeff(), 1e-300);
  if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= 1e-12 * scale) {
    throw NumericalError("readout normal matrix is singular" +
                         std::string(ridge == 0.0 ? "; use a ridge coefficient > 0" : ""));
  }
  const Eigen::VectorXd w = ldlt.solve(rhs);
  if (!w.allFinite()) throw NumericalError("readout solution is not finite");
  return Readout{w.head(d), w[d]};
}

Eigen::MatrixXd collect_final_states(const EsnModel& model, const GridDataset& dataset,
                                     const FeedingPlan& plan) {
  Eigen::MatrixXd states(static_cast<Eigen::Index>(dataset.size()), model.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const InputSequence seq = make_sequence(dataset[i], plan);
    states.row(static_cast<Eigen::Index>(i)) =
        esn_final_state(*model.reservoir, seq.steps).transpose();
  }
  return states;
}

EsnModel train_esn_readout(EsnModel model, const GridDataset& train,
                           const FeedingPlan& plan, double ridge) {
  const Eigen::MatrixXd states = collect_final_states(model, train, plan);
  Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) y[static_cast<Eigen::Index>(i)] = train[i].target;
  model.readout = fit_readout(states, y, ridge);
  return model;
}

EvalResult evaluate_predictions(std::span<const double> predictions,
                                std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw ShapeError("prediction/target count mismatch");
  if (predictions.empty()) throw ConfigError("dataset", "cannot evaluate an empty dataset");
  EvalResult r;
  r.count = predictions.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - targets[i];
    r.mse += e * e;
    correct += predict_class(predictions[i]) == label_from_target(targets[i]) ? 1 : 0;
  }
  r.mse /= static_cast<double>(r.count);
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.count);
  return r;
}

std::vector<double> predict(const MlpModel& model, const GridDataset& dataset) {
  std::vector<double> out;
  for (const auto& s : dataset.samples()) out.push_back(mlp_forward(model, model_input(model, s)).prediction);
  return out;
}

std::vector<double> predict(const ConvModel& model, const GridDataset& dataset) {
  std::vector<double> out;
  for (const auto& s : dataset.samples()) out.push_back(conv_forward(model, model_input(model, s)).prediction);
  return out;
}

std::vector<double> predict(const EsnModel& model, const GridDataset& dataset,
                            const FeedingPlan& plan) {
  const Eigen::MatrixXd states = collect_final_states(model, dataset, plan);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    out.push_back(model.readout.weights.dot(states.row(i)) + model.readout.bias);
  }
  return out;
}

namespace {

std::vector<double> targets_of(const GridDataset& ds) {
  std::vector<double> t;
  for (const auto& s : ds.samples()) t.push_back(s.target);
  return t;
}

}  // namespace

EvalResult evaluate(const MlpModel& model, const GridDataset& ds) {
  return evaluate_predictions(predict(model, ds), targets_of(ds));
}

EvalResult evaluate(const ConvModel& model, const GridDataset& ds) {
  return evaluate_predictions(predict(model, ds), targets_of(ds));
}

EvalResult evaluate(const EsnModel& model, const GridDataset& ds, const FeedingPlan& plan) {
  return evaluate_predictions(predict(model, ds, plan), targets_of(ds));
}

Metrics make_metrics(const EvalResult& train, const EvalResult& validation) {
  return {train.mse, validation.mse, train.accuracy, validation.accuracy};
}

namespace {

template <typename M>
double gradient_check_impl(const M& model, const Eigen::VectorXd& input,
                           const GradientCheckOptions& options) {
  const ForwardResult base = forward(model, input);
  Eigen::VectorXd analytic = Eigen::VectorXd::Zero(count_parameters(model));
  accumulate_gradient(model, base.trace, 1.0, analytic);

  const auto total = static_cast<int>(analytic.size());
  std::vector<int> picks = random_permutation(total, options.seed);
  picks.resize(static_cast<std::size_t>(std::min(total, options.max_parameters)));

  M probe = model;
  Eigen::VectorXd theta = get_parameters(model);
  double worst = 0.0;
  for (int idx : picks) {
    const double saved = theta[idx];
    theta[idx] = saved + options.step;
    set_parameters(probe, theta);
    const double up = forward(probe, input).prediction;
    theta[idx] = saved - options.step;
    set_parameters(probe, theta);
    const double down = forward(probe, input).prediction;
    theta[idx] = saved;
    const double numeric = (up - down) / (2.0 * options.step);
    const double denom = std::max({std::abs(analytic[idx]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[idx] - numeric) / denom);
  }
  return worst;
}

}  // namespace

double gradient_check(const MlpModel& model, const Eigen::VectorXd& input,
                      const GradientCheckOptions& options) {
  return gradient_check_impl(model, input, options);
}

double gradient_check(const ConvModel& model, const Eigen::VectorXd& input,
                      const GradientCheckOptions& options) {
  return gradient_check_impl(model, input, options);
}

double gradient_check(const MlpModel& model, const GridSample& sample,
                      const GradientCheckOptions& options) {
  return gradient_check_impl(model, model_input(model, sample), options);
}

double gradient_check(const ConvModel& model, const GridSample& sample,
                      const GradientCheckOptions& options) {
  return gradient_check_impl(model, model_input(model, sample), options);
}

}  // namespace lrplab
