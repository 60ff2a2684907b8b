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

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "lrplab/datagen.hpp"
#include "lrplab/preprocess.hpp"

namespace lrplab {

enum class Activation { kTanh, kLinear };

double activate(Activation act, double z) noexcept;
// Derivative expressed through the activation output.
double activate_grad(Activation act, double output) noexcept;

struct DenseLayer {
  Eigen::MatrixXd weights;  // outputs x inputs
  Eigen::VectorXd bias;
  Activation activation = Activation::kTanh;

  int inputs() const noexcept { return static_cast<int>(weights.cols()); }
  int outputs() const noexcept { return static_cast<int>(weights.rows()); }
};

struct MlpModel {
  std::vector<DenseLayer> layers;

  int input_width() const noexcept {
    return layers.empty() ? 0 : layers.front().inputs();
  }
  // Throws ShapeError unless layers chain and end in one linear unit.
  void validate() const;
};

// Zero biases, tanh hidden units, linear output. Weights are Glorot uniform,
// or normal with standard deviation `init_scale` when it is positive.
MlpModel make_mlp(int input_width, std::span<const int> hidden_units,
                  std::uint64_t seed, double init_scale = 0.0);

struct Shape3 {
  int channels = 1;
  int rows = 0;
  int cols = 0;
  int size() const noexcept { return channels * rows * cols; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

// Valid (no overhang) strided convolution. Kernel row o holds the weights of
// output channel o, laid out as (in_channel, kernel_row, kernel_col).
struct ConvStage {
  int kernel = 3;
  int stride = 3;
  int in_channels = 1;
  int out_channels = 1;
  Eigen::MatrixXd kernels;  // out_channels x (in_channels * kernel * kernel)
  Eigen::VectorXd bias;
  Activation activation = Activation::kTanh;

  double weight(int out, int in, int i, int j) const {
    return kernels(out, (in * kernel + i) * kernel + j);
  }
  // Throws ShapeError if `input` does not tile under kernel/stride.
  Shape3 output_shape(const Shape3& input) const;
};

// Convolution stages, flattened channel-major, then a dense head.
struct ConvModel {
  Shape3 input;
  std::vector<ConvStage> stages;
  std::vector<DenseLayer> head;

  void validate() const;
  Shape3 feature_shape() const;
};

struct CnnTopology {
  int kernel = 3;
  int stride = 3;
  int channels = 1;
  std::vector<int> hidden{2};
};

ConvModel make_cnn(int input_rows, int input_cols, const CnnTopology& topology,
                   std::uint64_t seed);

// One record per layer (dense layer or conv stage) in forward order.
struct LayerRecord {
  Eigen::VectorXd input;
  Eigen::VectorXd pre_activation;
  Eigen::VectorXd output;
};

struct LayerTrace {
  std::vector<LayerRecord> layers;
};

struct ForwardResult {
  double prediction = 0.0;
  LayerTrace trace;
};

ForwardResult mlp_forward(const MlpModel& model, const Eigen::VectorXd& input);
ForwardResult mlp_forward(const MlpModel& model, const FlatVector& input);

ForwardResult conv_forward(const ConvModel& model, const PaddedGrid& input);
ForwardResult conv_forward(const ConvModel& model, const Eigen::VectorXd& input);

// Channel-major convolution of one stage without activation.
Eigen::VectorXd convolve(const ConvStage& stage, const Shape3& in_shape,
                         const Eigen::VectorXd& input);

struct EsnConfig {
  int reservoir_size = 300;
  int input_dim = 100;
  double alpha = 0.005;
  double density = 0.1;
  double spectral_radius = 0.9;
  double input_scale = 0.5;  // W_in, b_in ~ U(-scale, scale)
  double reservoir_scale = 0.5;  // W_res entries before rescaling, b_res
  std::uint64_t seed = 1;

  void validate() const;
};

// Fixed part of an ESN. Never modified after construction.
struct Reservoir {
  Eigen::MatrixXd w_in;  // reservoir x input_dim
  Eigen::VectorXd b_in;
  Eigen::SparseMatrix<double, Eigen::RowMajor> w_res;
  Eigen::VectorXd b_res;
  double alpha = 0.0;

  int size() const noexcept { return static_cast<int>(w_in.rows()); }
  int input_dim() const noexcept { return static_cast<int>(w_in.cols()); }
};

struct Readout {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

struct EsnModel {
  std::shared_ptr<const Reservoir> reservoir;
  Readout readout;

  double alpha() const noexcept { return reservoir->alpha; }
  int size() const noexcept { return reservoir->size(); }
};

Reservoir make_reservoir(const EsnConfig& config);
EsnModel make_esn(const EsnConfig& config);

// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Eigen::MatrixXd& matrix);

// Row t of each matrix belongs to time step t+1.
struct StateTrace {
  Eigen::MatrixXd states;          // x(t)
  Eigen::MatrixXd pre_activations; // W_in u + b_in + W_res x(t-1) + b_res
  Eigen::MatrixXd carry;           // (1 - alpha) x(t-1); zero at t = 1
};

struct EsnForwardResult {
  double prediction = 0.0;
  StateTrace trace;
};

EsnForwardResult esn_forward(const EsnModel& model, const InputSequence& seq);

// x(T) only, without keeping the trace.
Eigen::VectorXd esn_final_state(const Reservoir& reservoir,
                                const Eigen::MatrixXd& steps);

// Ties go to class 1.
inline Label predict_class(double prediction) noexcept {
  return prediction >= 0.0 ? Label::kClass1 : Label::kClass2;
}

// Trainable scalars only; for an ESN that is the readout.
std::int64_t count_parameters(const DenseLayer& layer) noexcept;
std::int64_t count_parameters(const MlpModel& model) noexcept;
std::int64_t count_parameters(const ConvModel& model) noexcept;
std::int64_t count_parameters(const EsnModel& model) noexcept;

}  // namespace lrplab
