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

#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "lrplab/error.hpp"
#include "lrplab/models.hpp"
#include "test_support.hpp"

namespace lrplab {
namespace {

using testing::make_sample;
using testing::naive_convolution;
using testing::random_field;
using testing::random_stage;

MlpModel toy_mlp(double w1, double w2, double b1 = 0.0, double b2 = 0.0) {
  MlpModel m;
  DenseLayer hidden{Eigen::MatrixXd::Constant(1, 1, w1), Eigen::VectorXd::Constant(1, b1),
                    Activation::kTanh};
  DenseLayer out{Eigen::MatrixXd::Constant(1, 1, w2), Eigen::VectorXd::Constant(1, b2),
                 Activation::kLinear};
  m.layers = {hidden, out};
  return m;
}

EsnModel hand_esn(const Eigen::MatrixXd& w_in, const Eigen::MatrixXd& w_res,
                  const Eigen::VectorXd& b_in, const Eigen::VectorXd& b_res, double alpha,
                  const Eigen::VectorXd& readout, double bias) {
  auto res = std::make_shared<Reservoir>();
  res->w_in = w_in;
  res->w_res = w_res.sparseView();
  res->b_in = b_in;
  res->b_res = b_res;
  res->alpha = alpha;
  EsnModel m;
  m.reservoir = res;
  m.readout = {readout, bias};
  return m;
}

InputSequence raw_sequence(const Eigen::MatrixXd& steps) {
  InputSequence s;
  s.steps = steps;
  return s;
}

TEST(Mlp, ZeroWeightsGiveOutputBias) {
  const MlpModel m = toy_mlp(0.0, 0.0, 0.0, 0.37);
  EXPECT_EQ(mlp_forward(m, Eigen::VectorXd::Constant(1, 5.0)).prediction, 0.37);
}

TEST(Mlp, HandToy) {
  const MlpModel m = toy_mlp(1.0, 2.0);
  EXPECT_EQ(mlp_forward(m, Eigen::VectorXd::Zero(1)).prediction, 0.0);
  const ForwardResult r = mlp_forward(m, Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_DOUBLE_EQ(r.prediction, 2.0 * std::tanh(0.5));
  ASSERT_EQ(r.trace.layers.size(), 2u);
  EXPECT_DOUBLE_EQ(r.trace.layers[0].pre_activation[0], 0.5);
  EXPECT_DOUBLE_EQ(r.trace.layers[1].input[0], std::tanh(0.5));
  EXPECT_THROW(mlp_forward(m, Eigen::VectorXd::Zero(2)), ShapeError);
}

TEST(Mlp, ParameterCounts) {
  const std::vector<int> hidden{2};
  const MlpModel m = make_mlp(9600, hidden, 3);
  EXPECT_EQ(count_parameters(m), 19205);
  DenseLayer l{Eigen::MatrixXd::Zero(4, 7), Eigen::VectorXd::Zero(4), Activation::kTanh};
  EXPECT_EQ(count_parameters(l), 7 * 4 + 4);
  EXPECT_THROW(make_mlp(0, hidden, 1), ConfigError);
}

TEST(Mlp, GlorotBoundsAndDeterminism) {
  const std::vector<int> hidden{5};
  const MlpModel a = make_mlp(40, hidden, 9);
  const MlpModel b = make_mlp(40, hidden, 9);
  EXPECT_EQ(a.layers[0].weights, b.layers[0].weights);
  const double limit = std::sqrt(6.0 / (40 + 5));
  EXPECT_LE(a.layers[0].weights.cwiseAbs().maxCoeff(), limit);
  EXPECT_TRUE(a.layers[0].bias.isZero());
  EXPECT_EQ(a.layers.back().activation, Activation::kLinear);
}

TEST(Mlp, ValidateRejectsBrokenChain) {
  MlpModel m = toy_mlp(1.0, 1.0);
  m.layers[1].weights = Eigen::MatrixXd::Zero(1, 3);
  EXPECT_THROW(m.validate(), ShapeError);
  m = toy_mlp(1.0, 1.0);
  m.layers[1].activation = Activation::kTanh;
  EXPECT_THROW(m.validate(), ShapeError);
}

TEST(Conv, AllOnes) {
  ConvStage s;
  s.kernel = 3;
  s.stride = 3;
  s.kernels = Eigen::MatrixXd::Ones(1, 9);
  s.bias = Eigen::VectorXd::Zero(1);
  s.activation = Activation::kLinear;
  const Eigen::VectorXd out = convolve(s, {1, 3, 3}, Eigen::VectorXd::Ones(9));
  ASSERT_EQ(out.size(), 1);
  EXPECT_EQ(out[0], 9.0);
}

TEST(Conv, DeltaKernelSubsamples) {
  ConvStage s;
  s.kernels = Eigen::MatrixXd::Zero(1, 9);
  s.kernels(0, 4) = 1.0;
  s.bias = Eigen::VectorXd::Zero(1);
  Rng rng(4);
  const Eigen::VectorXd x = testing::random_vector(36, rng);
  const Eigen::VectorXd out = convolve(s, {1, 6, 6}, x);
  ASSERT_EQ(out.size(), 4);
  EXPECT_EQ(out[0], x[1 * 6 + 1]);
  EXPECT_EQ(out[1], x[1 * 6 + 4]);
  EXPECT_EQ(out[2], x[4 * 6 + 1]);
  EXPECT_EQ(out[3], x[4 * 6 + 4]);
}

TEST(Conv, MatchesNaiveLoops) {
  Rng rng(21);
  struct Case {
    int rows, cols, k, s, in_ch, out_ch;
  };
  for (const Case c : {Case{6, 6, 3, 3, 1, 1}, Case{8, 8, 3, 1, 1, 2}, Case{8, 8, 2, 2, 2, 3},
                       Case{9, 7, 3, 2, 1, 1}}) {
    const ConvStage s = random_stage(c.k, c.s, c.in_ch, c.out_ch, rng);
    const Shape3 in{c.in_ch, c.rows, c.cols};
    const Eigen::VectorXd x = testing::random_vector(in.size(), rng);
    const Eigen::VectorXd got = convolve(s, in, x);
    const Eigen::VectorXd want = naive_convolution(s, in, x);
    ASSERT_EQ(got.size(), want.size());
    EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Conv, TilingMismatchRejected) {
  ConvStage s;
  s.kernels = Eigen::MatrixXd::Ones(1, 9);
  s.bias = Eigen::VectorXd::Zero(1);
  EXPECT_THROW(s.output_shape({1, 5, 6}), ShapeError);
  EXPECT_THROW(s.output_shape({2, 6, 6}), ShapeError);
}

TEST(Cnn, DefaultTopologyParameterCount) {
  const ConvModel m = make_cnn(102, 102, CnnTopology{}, 3);
  EXPECT_EQ(m.feature_shape(), (Shape3{1, 34, 34}));
  EXPECT_EQ(count_parameters(m), 9 + 1 + 34 * 34 * 2 + 2 + 2 + 1);
}

TEST(Cnn, ForwardMatchesManualPipeline) {
  Rng rng(5);
  CnnTopology topo;
  topo.channels = 2;
  const ConvModel m = make_cnn(6, 9, topo, 8);
  const Field grid = random_field(5, 9, rng);
  const PaddedGrid padded = pad_for_conv(make_sample(grid, Mask(5, 9, 1)), 3, 3);
  const ForwardResult r = conv_forward(m, padded);

  Eigen::VectorXd x(54);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 9; ++j) x[i * 9 + j] = padded.values(i, j);
  Eigen::VectorXd feat = naive_convolution(m.stages[0], m.input, x).array().tanh();
  Eigen::VectorXd h = (m.head[0].weights * feat + m.head[0].bias).array().tanh();
  const double y = (m.head[1].weights * h + m.head[1].bias)[0];
  EXPECT_NEAR(r.prediction, y, 1e-12);
  EXPECT_THROW(conv_forward(m, Eigen::VectorXd::Zero(10)), ShapeError);
}

TEST(Esn, ZeroLeakKeepsStateAtZero) {
  EsnConfig cfg;
  cfg.reservoir_size = 20;
  cfg.input_dim = 3;
  cfg.alpha = 0.0;
  EsnModel m = make_esn(cfg);
  m.readout.bias = -0.4;
  Rng rng(2);
  const EsnForwardResult r = esn_forward(m, raw_sequence(testing::random_matrix(6, 3, rng)));
  EXPECT_TRUE(r.trace.states.isZero());
  EXPECT_EQ(r.prediction, -0.4);
}

TEST(Esn, FullLeakWithoutRecurrenceIsMemoryless) {
  Rng rng(3);
  const Eigen::MatrixXd w_in = testing::random_matrix(4, 2, rng);
  const EsnModel m = hand_esn(w_in, Eigen::MatrixXd::Zero(4, 4), Eigen::VectorXd::Zero(4),
                              Eigen::VectorXd::Zero(4), 1.0, Eigen::VectorXd::Ones(4), 0.0);
  const Eigen::MatrixXd u = testing::random_matrix(5, 2, rng);
  const EsnForwardResult r = esn_forward(m, raw_sequence(u));
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd want = (w_in * u.row(t).transpose()).array().tanh();
    EXPECT_LE((r.trace.states.row(t).transpose() - want).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Esn, TwoUnitHandUnroll) {
  Eigen::MatrixXd w_in(2, 1);
  w_in << 0.5, -1.0;
  Eigen::MatrixXd w_res(2, 2);
  w_res << 0.0, 0.3, -0.2, 0.1;
  const Eigen::Vector2d b_in(0.1, 0.0), b_res(0.0, -0.05);
  const double a = 0.4;
  const EsnModel m = hand_esn(w_in, w_res, b_in, b_res, a, Eigen::Vector2d(1.5, -2.0), 0.25);
  Eigen::MatrixXd u(3, 1);
  u << 1.0, 0.2, -0.7;
  const EsnForwardResult r = esn_forward(m, raw_sequence(u));

  double x1 = a * std::tanh(0.5 * 1.0 + 0.1);
  double x2 = a * std::tanh(-1.0 * 1.0);
  EXPECT_NEAR(r.trace.states(0, 0), x1, 1e-15);
  EXPECT_NEAR(r.trace.states(0, 1), x2, 1e-15);
  for (int t = 1; t < 3; ++t) {
    const double p1 = 0.5 * u(t, 0) + 0.1 + 0.3 * x2;
    const double p2 = -1.0 * u(t, 0) - 0.2 * x1 + 0.1 * x2 - 0.05;
    const double n1 = (1 - a) * x1 + a * std::tanh(p1);
    const double n2 = (1 - a) * x2 + a * std::tanh(p2);
    x1 = n1;
    x2 = n2;
    EXPECT_NEAR(r.trace.states(t, 0), x1, 1e-15);
    EXPECT_NEAR(r.trace.states(t, 1), x2, 1e-15);
    EXPECT_NEAR(r.trace.pre_activations(t, 0), p1, 1e-15);
  }
  EXPECT_NEAR(r.prediction, 1.5 * x1 - 2.0 * x2 + 0.25, 1e-14);
  EXPECT_EQ(esn_final_state(*m.reservoir, u), r.trace.states.row(2).transpose());
}

TEST(Esn, StatesBoundedAndParameterCount) {
  EsnConfig cfg;
  cfg.input_dim = 10;
  cfg.alpha = 0.7;
  cfg.input_scale = 5.0;
  const EsnModel m = make_esn(cfg);
  EXPECT_EQ(count_parameters(m), 301);
  EXPECT_NEAR(spectral_radius(Eigen::MatrixXd(m.reservoir->w_res)), 0.9, 1e-9);
  Rng rng(6);
  const EsnForwardResult r =
      esn_forward(m, raw_sequence(testing::random_matrix(40, 10, rng, -3.0, 3.0)));
  EXPECT_LE(r.trace.states.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_THROW(esn_forward(m, raw_sequence(Eigen::MatrixXd::Zero(3, 4))), ShapeError);
}

TEST(Esn, ConfigValidation) {
  EsnConfig cfg;
  cfg.alpha = 1.5;
  EXPECT_THROW(make_esn(cfg), ConfigError);
  cfg = EsnConfig{};
  cfg.density = -0.1;
  EXPECT_THROW(make_esn(cfg), ConfigError);
}

TEST(Predict, SignTieBreak) {
  EXPECT_EQ(predict_class(0.8), Label::kClass1);
  EXPECT_EQ(predict_class(-0.3), Label::kClass2);
  EXPECT_EQ(predict_class(0.0), Label::kClass1);
}

}  // namespace
}  // namespace lrplab
