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

#include "lrplab/models.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "lrplab/error.hpp"
#include "lrplab/rng.hpp"

namespace lrplab {

double activate(Activation act, double z) noexcept {
  return act == Activation::kTanh ? std::tanh(z) : z;
}

double activate_grad(Activation act, double output) noexcept {
  return act == Activation::kTanh ? 1.0 - output * output : 1.0;
}

namespace {

void check_dense_chain(const std::vector<DenseLayer>& layers, int input_width,
                       const char* what) {
  int width = input_width;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& layer = layers[i];
    if (layer.inputs() != width) {
      throw ShapeError(std::string(what) + " layer " + std::to_string(i) +
                       " expects " + std::to_string(layer.inputs()) +
                       " inputs, previous layer provides " + std::to_string(width));
    }
    if (layer.bias.size() != layer.outputs()) {
      throw ShapeError(std::string(what) + " layer " + std::to_string(i) +
                       " bias length differs from its output width");
    }
    width = layer.outputs();
  }
  if (layers.empty() || width != 1 ||
      layers.back().activation != Activation::kLinear) {
    throw ShapeError(std::string(what) + " must end in a single linear unit");
  }
}

void glorot_fill(Eigen::MatrixXd& m, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
}

DenseLayer make_dense(int in, int out, Activation act, Rng& rng) {
  DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out), act};
  glorot_fill(layer.weights, in, out, rng);
  return layer;
}

std::vector<DenseLayer> make_dense_stack(int input_width,
                                         std::span<const int> hidden, Rng& rng) {
  std::vector<DenseLayer> layers;
  int width = input_width;
  for (int units : hidden) {
    if (units < 1) throw ConfigError("hidden", "layer widths must be >= 1");
    layers.push_back(make_dense(width, units, Activation::kTanh, rng));
    width = units;
  }
  layers.push_back(make_dense(width, 1, Activation::kLinear, rng));
  return layers;
}

double run_dense(const std::vector<DenseLayer>& layers, Eigen::VectorXd x,
                 LayerTrace& trace) {
  for (const DenseLayer& layer : layers) {
    LayerRecord rec;
    rec.input = std::move(x);
    rec.pre_activation = layer.weights * rec.input + layer.bias;
    rec.output = rec.pre_activation.unaryExpr(
        [act = layer.activation](double z) { return activate(act, z); });
    x = rec.output;
    trace.layers.push_back(std::move(rec));
  }
  return x[0];
}

}  // namespace

void MlpModel::validate() const {
  if (layers.empty()) throw ShapeError("MLP has no layers");
  check_dense_chain(layers, input_width(), "MLP");
}

MlpModel make_mlp(int input_width, std::span<const int> hidden_units,
                  std::uint64_t seed, double init_scale) {
  if (input_width < 1) throw ConfigError("input_width", "must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale", "must be >= 0");
  Rng rng(seed);
  MlpModel model{make_dense_stack(input_width, hidden_units, rng)};
  if (init_scale > 0.0) {
    // Hidden layers only; the output layer keeps its Glorot draw.
    for (std::size_t i = 0; i + 1 < model.layers.size(); ++i) {
      Eigen::MatrixXd& w = model.layers[i].weights;
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = init_scale * rng.normal();
    }
  }
  model.validate();
  return model;
}

Shape3 ConvStage::output_shape(const Shape3& in) const {
  if (in.channels != in_channels) {
    throw ShapeError("conv stage expects " + std::to_string(in_channels) +
                     " channels, got " + std::to_string(in.channels));
  }
  if (in.rows < kernel || in.cols < kernel || (in.rows - kernel) % stride != 0 ||
      (in.cols - kernel) % stride != 0) {
    throw ShapeError("input " + std::to_string(in.rows) + "x" +
                     std::to_string(in.cols) + " does not tile under kernel " +
                     std::to_string(kernel) + ", stride " + std::to_string(stride));
  }
  return {out_channels, (in.rows - kernel) / stride + 1,
          (in.cols - kernel) / stride + 1};
}

void ConvModel::validate() const {
  Shape3 shape = input;
  for (const ConvStage& stage : stages) {
    if (stage.kernels.rows() != stage.out_channels ||
        stage.kernels.cols() != stage.in_channels * stage.kernel * stage.kernel ||
        stage.bias.size() != stage.out_channels) {
      throw ShapeError("conv stage parameter shapes are inconsistent");
    }
    shape = stage.output_shape(shape);
  }
  check_dense_chain(head, shape.size(), "CNN head");
}

Shape3 ConvModel::feature_shape() const {
  Shape3 shape = input;
  for (const ConvStage& stage : stages) shape = stage.output_shape(shape);
  return shape;
}

ConvModel make_cnn(int input_rows, int input_cols, const CnnTopology& topology,
                   std::uint64_t seed) {
  if (topology.channels < 1) throw ConfigError("cnn.channels", "must be >= 1");
  Rng rng(seed);
  ConvModel model;
  model.input = {1, input_rows, input_cols};
  ConvStage stage;
  stage.kernel = topology.kernel;
  stage.stride = topology.stride;
  stage.in_channels = 1;
  stage.out_channels = topology.channels;
  stage.kernels.resize(stage.out_channels, stage.kernel * stage.kernel);
  glorot_fill(stage.kernels, stage.kernel * stage.kernel,
              stage.out_channels * stage.kernel * stage.kernel, rng);
  stage.bias = Eigen::VectorXd::Zero(stage.out_channels);
  model.stages.push_back(std::move(stage));
  model.head = make_dense_stack(model.feature_shape().size(), topology.hidden, rng);
  model.validate();
  return model;
}

ForwardResult mlp_forward(const MlpModel& model, const Eigen::VectorXd& input) {
  if (input.size() != model.input_width()) {
    throw ShapeError("MLP expects " + std::to_string(model.input_width()) +
                     " inputs, got " + std::to_string(input.size()));
  }
  ForwardResult out;
  out.trace.layers.reserve(model.layers.size());
  out.prediction = run_dense(model.layers, input, out.trace);
  return out;
}

ForwardResult mlp_forward(const MlpModel& model, const FlatVector& input) {
  return mlp_forward(model, input.values);
}

Eigen::VectorXd convolve(const ConvStage& stage, const Shape3& in_shape,
                         const Eigen::VectorXd& input) {
  const Shape3 out_shape = stage.output_shape(in_shape);
  if (input.size() != in_shape.size()) throw ShapeError("conv input length mismatch");
  Eigen::VectorXd out(out_shape.size());
  const int k = stage.kernel;
  for (int o = 0; o < out_shape.channels; ++o) {
    for (int y = 0; y < out_shape.rows; ++y) {
      for (int x = 0; x < out_shape.cols; ++x) {
        double z = stage.bias[o];
        for (int c = 0; c < in_shape.channels; ++c) {
          const double* plane = input.data() + c * in_shape.rows * in_shape.cols;
          for (int i = 0; i < k; ++i) {
            const double* row = plane + (y * stage.stride + i) * in_shape.cols +
                                x * stage.stride;
            for (int j = 0; j < k; ++j) z += stage.weight(o, c, i, j) * row[j];
          }
        }
        out[(o * out_shape.rows + y) * out_shape.cols + x] = z;
      }
    }
  }
  return out;
}

ForwardResult conv_forward(const ConvModel& model, const Eigen::VectorXd& input) {
  if (input.size() != model.input.size()) {
    throw ShapeError("CNN expects " + std::to_string(model.input.size()) +
                     " inputs, got " + std::to_string(input.size()));
  }
  ForwardResult out;
  Shape3 shape = model.input;
  Eigen::VectorXd x = input;
  for (const ConvStage& stage : model.stages) {
    LayerRecord rec;
    rec.input = std::move(x);
    rec.pre_activation = convolve(stage, shape, rec.input);
    rec.output = rec.pre_activation.unaryExpr(
        [act = stage.activation](double z) { return activate(act, z); });
    x = rec.output;
    shape = stage.output_shape(shape);
    out.trace.layers.push_back(std::move(rec));
  }
  out.prediction = run_dense(model.head, std::move(x), out.trace);
  return out;
}

ForwardResult conv_forward(const ConvModel& model, const PaddedGrid& input) {
  if (input.values.rows() != model.input.rows ||
      input.values.cols() != model.input.cols || model.input.channels != 1) {
    throw ShapeError("padded grid " + std::to_string(input.values.rows()) + "x" +
                     std::to_string(input.values.cols()) +
                     " does not match CNN input " + std::to_string(model.input.rows) +
                     "x" + std::to_string(model.input.cols));
  }
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
      input.values.data(), static_cast<Eigen::Index>(input.values.size()));
  return conv_forward(model, x);
}

void EsnConfig::validate() const {
  if (reservoir_size < 1) throw ConfigError("esn.reservoir", "must be >= 1");
  if (input_dim < 1) throw ConfigError("esn.input_dim", "must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("esn.alpha", "must lie in [0, 1]");
  if (!(density >= 0.0 && density <= 1.0)) throw ConfigError("esn.density", "must lie in [0, 1]");
  if (!(spectral_radius >= 0.0)) throw ConfigError("esn.spectral_radius", "must be >= 0");
}

double spectral_radius(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw ShapeError("spectral radius needs a square matrix");
  if (matrix.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Reservoir make_reservoir(const EsnConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int n = config.reservoir_size;
  Reservoir res;
  res.alpha = config.alpha;
  res.w_in.resize(n, config.input_dim);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < config.input_dim; ++c)
      res.w_in(r, c) = rng.uniform(-config.input_scale, config.input_scale);
  res.b_in.resize(n);
  for (int r = 0; r < n; ++r) res.b_in[r] = rng.uniform(-config.input_scale, config.input_scale);

  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double keep = rng.uniform01();
      const double value = rng.uniform(-config.reservoir_scale, config.reservoir_scale);
      if (keep < config.density) dense(r, c) = value;
    }
  }
  const double radius = spectral_radius(dense);
  if (radius > 0.0) dense *= config.spectral_radius / radius;
  res.w_res = dense.sparseView();
  res.w_res.makeCompressed();

  res.b_res.resize(n);
  for (int r = 0; r < n; ++r)
    res.b_res[r] = rng.uniform(-config.reservoir_scale, config.reservoir_scale);
  return res;
}

EsnModel make_esn(const EsnConfig& config) {
  EsnModel model;
  model.reservoir = std::make_shared<const Reservoir>(make_reservoir(config));
  model.readout.weights = Eigen::VectorXd::Zero(config.reservoir_size);
  return model;
}

EsnForwardResult esn_forward(const EsnModel& model, const InputSequence& seq) {
  const Reservoir& res = *model.reservoir;
  if (seq.width() != res.input_dim()) {
    throw ShapeError("sequence step width " + std::to_string(seq.width()) +
                     " differs from reservoir input dimension " +
                     std::to_string(res.input_dim()));
  }
  if (seq.length() < 1) throw ShapeError("empty input sequence");
  if (model.readout.weights.size() != res.size()) {
    throw ShapeError("readout width differs from reservoir size");
  }
  const int steps = seq.length();
  const double a = res.alpha;
  EsnForwardResult out;
  StateTrace& tr = out.trace;
  tr.states.resize(steps, res.size());
  tr.pre_activations.resize(steps, res.size());
  tr.carry = Eigen::MatrixXd::Zero(steps, res.size());

  Eigen::VectorXd pre = res.w_in * seq.steps.row(0).transpose() + res.b_in;
  Eigen::VectorXd x = a * pre.array().tanh();
  tr.pre_activations.row(0) = pre.transpose();
  tr.states.row(0) = x.transpose();
  for (int t = 1; t < steps; ++t) {
    pre = res.w_in * seq.steps.row(t).transpose() + res.b_in + res.w_res * x + res.b_res;
    Eigen::VectorXd carry = (1.0 - a) * x;
    x = carry + a * pre.array().tanh().matrix();
    tr.pre_activations.row(t) = pre.transpose();
    tr.carry.row(t) = carry.transpose();
    tr.states.row(t) = x.transpose();
  }
  out.prediction = model.readout.weights.dot(x) + model.readout.bias;
  return out;
}

Eigen::VectorXd esn_final_state(const Reservoir& res, const Eigen::MatrixXd& steps) {
  if (steps.cols() != res.input_dim()) throw ShapeError("step width differs from reservoir input");
  if (steps.rows() < 1) throw ShapeError("empty input sequence");
  const double a = res.alpha;
  // Input drive for all steps at once.
  const Eigen::MatrixXd drive = (res.w_in * steps.transpose()).colwise() + res.b_in;
  Eigen::VectorXd x = a * drive.col(0).array().tanh().matrix();
  for (Eigen::Index t = 1; t < steps.rows(); ++t) {
    Eigen::VectorXd pre = drive.col(t) + res.w_res * x + res.b_res;
    x = (1.0 - a) * x + a * pre.array().tanh().matrix();
  }
  return x;
}

std::int64_t count_parameters(const DenseLayer& layer) noexcept {
  return static_cast<std::int64_t>(layer.weights.size() + layer.bias.size());
}

std::int64_t count_parameters(const MlpModel& model) noexcept {
  std::int64_t n = 0;
  for (const auto& layer : model.layers) n += count_parameters(layer);
  return n;
}

std::int64_t count_parameters(const ConvModel& model) noexcept {
  std::int64_t n = 0;
  for (const auto& stage : model.stages) n += stage.kernels.size() + stage.bias.size();
  for (const auto& layer : model.head) n += count_parameters(layer);
  return n;
}

std::int64_t count_parameters(const EsnModel& model) noexcept {
  return static_cast<std::int64_t>(model.readout.weights.size()) + 1;
}

}  // namespace lrplab
