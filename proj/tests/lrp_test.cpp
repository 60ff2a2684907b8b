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
#include "lrplab/lrp.hpp"
#include "test_support.hpp"

namespace lrplab {
namespace {

using testing::make_sample;
using testing::random_matrix;
using testing::random_stage;
using testing::random_vector;

// Literal proportional rule on a dense matrix, written independently of the
// library.
Eigen::VectorXd reference_dense(const Eigen::VectorXd& a, const Eigen::MatrixXd& w,
                                const Eigen::VectorXd& r, const std::vector<SignRule>& rules,
                                double& sunk) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size());
  sunk = 0.0;
  for (int j = 0; j < w.rows(); ++j) {
    Eigen::VectorXd z = a.cwiseProduct(w.row(j).transpose());
    if (rules[j] == SignRule::kNegative) z = -z;
    z = z.cwiseMax(0.0).eval();
    if (z.sum() > 0.0) {
      out += r[j] * z / z.sum();
    } else {
      sunk += r[j];
    }
  }
  return out;
}

TEST(LrpDense, ProportionalShares) {
  const Eigen::Vector2d a(3.0, 1.0);
  const Eigen::MatrixXd w = Eigen::MatrixXd::Ones(1, 2);
  const LayerRelevance r = lrp_dense(a, w, Eigen::VectorXd::Constant(1, 2.0), SignRule::kPositive);
  EXPECT_DOUBLE_EQ(r.relevance[0], 1.5);
  EXPECT_DOUBLE_EQ(r.relevance[1], 0.5);
  EXPECT_EQ(r.sunk, 0.0);
}

TEST(LrpDense, NegativeRuleUsesMagnitudes) {
  const Eigen::Vector3d a(1.0, -2.0, 0.5);
  Eigen::MatrixXd w(1, 3);
  w << -1.0, -1.0, 2.0;  // contributions -1, 2, 1
  const LayerRelevance r = lrp_dense(a, w, Eigen::VectorXd::Ones(1), SignRule::kNegative);
  EXPECT_DOUBLE_EQ(r.relevance[0], 1.0);
  EXPECT_EQ(r.relevance[1], 0.0);
  EXPECT_EQ(r.relevance[2], 0.0);
}

TEST(LrpDense, EmptyShareSetSinks) {
  const Eigen::Vector2d a(1.0, 2.0);
  Eigen::MatrixXd w(2, 2);
  w << -1.0, -0.5, 1.0, 1.0;
  const LayerRelevance r = lrp_dense(a, w, Eigen::Vector2d(0.7, 0.0), SignRule::kPositive);
  EXPECT_TRUE(r.relevance.isZero());
  EXPECT_DOUBLE_EQ(r.sunk, 0.7);
}

TEST(LrpDense, IdentityLayerPassesThrough) {
  const Eigen::Vector3d a(0.2, 1.0, 3.0);
  const Eigen::Vector3d up(0.5, 0.1, 2.0);
  const LayerRelevance r =
      lrp_dense(a, Eigen::Vector3d(2.0, 0.5, 1.0).asDiagonal().toDenseMatrix(), up,
                SignRule::kPositive);
  EXPECT_LE((r.relevance - up).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LrpDense, MatchesReferenceWithMixedRules) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd a = random_vector(7, rng);
    const Eigen::MatrixXd w = random_matrix(4, 7, rng);
    const Eigen::VectorXd up = random_vector(4, rng, 0.0, 1.0);
    std::vector<SignRule> rules;
    for (int j = 0; j < 4; ++j)
      rules.push_back(rng.uniform01() < 0.5 ? SignRule::kPositive : SignRule::kNegative);
    double sunk = 0.0;
    const Eigen::VectorXd want = reference_dense(a, w, up, rules, sunk);
    const LayerRelevance got = lrp_dense(a, w, up, rules);
    EXPECT_LE((got.relevance - want).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(got.sunk, sunk, 1e-15);
  }
}

TEST(LrpDense, RejectsBadInput) {
  const Eigen::Vector2d a(1.0, 1.0);
  const Eigen::MatrixXd w = Eigen::MatrixXd::Ones(1, 2);
  EXPECT_THROW(lrp_dense(a, w, Eigen::VectorXd::Constant(1, -1.0), SignRule::kPositive),
               NumericalError);
  EXPECT_THROW(lrp_dense(a, Eigen::MatrixXd::Ones(1, 3), Eigen::VectorXd::Ones(1),
                         SignRule::kPositive),
               ShapeError);
  EXPECT_THROW(lrp_dense(Eigen::Vector2d(NAN, 1.0), w, Eigen::VectorXd::Ones(1),
                         SignRule::kPositive),
               NumericalError);
}

TEST(LrpDense, ScaleCovariance) {
  Rng rng(2);
  const Eigen::VectorXd a = random_vector(6, rng);
  const Eigen::MatrixXd w = random_matrix(3, 6, rng);
  const Eigen::VectorXd up = random_vector(3, rng, 0.0, 1.0);
  const LayerRelevance r1 = lrp_dense(a, w, up, SignRule::kPositive);
  const LayerRelevance r2 = lrp_dense(a, w, 3.5 * up, SignRule::kPositive);
  EXPECT_LE((r2.relevance - 3.5 * r1.relevance).cwiseAbs().maxCoeff(), 1e-14);
  // Rescaling the activations by a positive constant leaves shares unchanged.
  const LayerRelevance r3 = lrp_dense(2.0 * a, w, up, SignRule::kPositive);
  EXPECT_LE((r3.relevance - r1.relevance).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(LrpConv, AllOnesKernelIsProportionalToInput) {
  ConvStage s;
  s.kernels = Eigen::MatrixXd::Ones(1, 9);
  s.bias = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(9, 1.0, 9.0);
  const LayerRelevance r = lrp_conv(x, {1, 3, 3}, s, Eigen::VectorXd::Ones(1), SignRule::kPositive);
  EXPECT_LE((r.relevance - x / x.sum()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LrpConv, DeltaKernelHitsSampledCells) {
  ConvStage s;
  s.kernels = Eigen::MatrixXd::Zero(1, 9);
  s.kernels(0, 4) = 1.0;
  s.bias = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(36, 0.5);
  const Eigen::Vector4d up(1.0, 2.0, 3.0, 4.0);
  const LayerRelevance r = lrp_conv(x, {1, 6, 6}, s, up, SignRule::kPositive);
  EXPECT_DOUBLE_EQ(r.relevance[7], 1.0);
  EXPECT_DOUBLE_EQ(r.relevance[10], 2.0);
  EXPECT_DOUBLE_EQ(r.relevance[25], 3.0);
  EXPECT_DOUBLE_EQ(r.relevance[28], 4.0);
  EXPECT_DOUBLE_EQ(r.relevance.sum(), 10.0);
}

TEST(LrpConv, MatchesUnrolledDense) {
  Rng rng(3);
  struct Case {
    int rows, cols, k, s, in_ch, out_ch;
  };
  for (const Case c : {Case{8, 8, 3, 1, 1, 1}, Case{8, 8, 2, 2, 2, 3}, Case{9, 9, 3, 3, 1, 2},
                       Case{8, 8, 4, 2, 3, 2}}) {
    for (int trial = 0; trial < 10; ++trial) {
      const ConvStage st = random_stage(c.k, c.s, c.in_ch, c.out_ch, rng);
      const Shape3 in{c.in_ch, c.rows, c.cols};
      const Eigen::VectorXd x = random_vector(in.size(), rng);
      const Eigen::MatrixXd w = testing::unrolled_convolution(st, in);
      const Eigen::VectorXd up = random_vector(static_cast<int>(w.rows()), rng, 0.0, 1.0);
      std::vector<SignRule> rules;
      for (int j = 0; j < w.rows(); ++j)
        rules.push_back(rng.uniform01() < 0.5 ? SignRule::kPositive : SignRule::kNegative);
      const LayerRelevance conv = lrp_conv(x, in, st, up, rules);
      const LayerRelevance dense = lrp_dense(x, w, up, rules);
      EXPECT_LE((conv.relevance - dense.relevance).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_NEAR(conv.sunk, dense.sunk, 1e-12);
    }
  }
}

TEST(UnitSignRules, FollowPreActivationSign) {
  const auto rules = unit_sign_rules(Eigen::Vector3d(0.3, -0.1, 0.0));
  EXPECT_EQ(rules[0], SignRule::kPositive);
  EXPECT_EQ(rules[1], SignRule::kNegative);
  EXPECT_EQ(rules[2], SignRule::kPositive);
}

void expect_conserved(const FeedforwardRelevance& r) {
  ASSERT_EQ(r.layer_totals.size(), r.layer_sunk_above.size());
  for (std::size_t l = 0; l < r.layer_totals.size(); ++l) {
    EXPECT_LE(std::abs(r.layer_totals[l] + r.layer_sunk_above[l] - r.start),
              1e-9 * std::max(r.start, 1e-300))
        << "level " << l;
  }
  EXPECT_GE(r.input.minCoeff(), 0.0);
  EXPECT_NEAR(r.input.sum(), r.layer_totals.back(), 1e-12 * std::max(1.0, r.start));
}

TEST(LrpFeedforward, RandomMlpConservesRelevance) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<int> hidden{1 + static_cast<int>(rng.below(5)),
                                  1 + static_cast<int>(rng.below(4))};
    const int width = 3 + static_cast<int>(rng.below(20));
    const MlpModel m = make_mlp(width, hidden, trial);
    for (HiddenRule h : {HiddenRule::kUnitSign, HiddenRule::kClassRule}) {
      for (Label label : {Label::kClass1, Label::kClass2}) {
        LrpOptions opts;
        opts.hidden = h;
        const FeedforwardRelevance r = lrp_feedforward(m, random_vector(width, rng), label, opts);
        EXPECT_EQ(r.layer_totals.size(), 4u);
        expect_conserved(r);
      }
    }
  }
}

TEST(LrpFeedforward, RandomCnnConservesRelevance) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    CnnTopology topo;
    topo.channels = 1 + static_cast<int>(rng.below(3));
    topo.kernel = 2 + static_cast<int>(rng.below(2));
    topo.stride = 1 + static_cast<int>(rng.below(3));
    const int rows = padded_extent(8, topo.kernel, topo.stride);
    const ConvModel m = make_cnn(rows, rows, topo, trial);
    const FeedforwardRelevance r =
        lrp_feedforward(m, random_vector(rows * rows, rng), Label::kClass1);
    expect_conserved(r);
  }
}

TEST(LrpFeedforward, SingleLinearLayerClosedForm) {
  MlpModel m;
  Eigen::MatrixXd w(1, 4);
  w << 0.5, -1.0, 2.0, 0.25;
  m.layers.push_back({w, Eigen::VectorXd::Constant(1, 0.3), Activation::kLinear});
  const Eigen::Vector4d x(1.0, 1.0, 0.5, -2.0);
  const FeedforwardRelevance r = lrp_feedforward(m, x, Label::kClass1);
  const double y = w.row(0).dot(x) + 0.3;
  ASSERT_GT(y, 0.0);
  const Eigen::Vector4d pos = x.cwiseProduct(w.row(0).transpose()).cwiseMax(0.0);
  EXPECT_LE((r.input - pos * y / pos.sum()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(LrpFeedforward, WrongSignWarnsButKeepsRule) {
  MlpModel m;
  m.layers.push_back({Eigen::MatrixXd::Constant(1, 2, 1.0), Eigen::VectorXd::Zero(1),
                      Activation::kLinear});
  const FeedforwardRelevance r = lrp_feedforward(m, Eigen::Vector2d(-1.0, 0.5), Label::kClass1);
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_DOUBLE_EQ(r.start, 0.5);
  EXPECT_DOUBLE_EQ(r.input[1], 0.5);
  EXPECT_EQ(r.input[0], 0.0);
}

TEST(LrpFeedforward, InjectedZerosGetNothing) {
  const DatasetPair data = generate_synthetic(testing::small_synthetic());
  CnnTopology topo;
  const ConvModel m = make_cnn(padded_extent(12, 3, 3), padded_extent(16, 3, 3), topo, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    const RelevanceMap map = lrp_feedforward(m, data.train[i]);
    EXPECT_EQ(map.audit.pad_discarded, 0.0);
    EXPECT_EQ(map.audit.invalid_discarded, 0.0);
    EXPECT_LE(std::abs(map.audit.residual()), 1e-9 * map.audit.total_in);
  }
}

TEST(LrpFeedforward, MapAuditReconciles) {
  const DatasetPair data = generate_synthetic(testing::small_synthetic());
  const std::vector<int> hidden{3};
  const MlpModel m = make_mlp(data.train.valid_count(), hidden, 6);
  const RelevanceMap map = lrp_feedforward(m, data.train[0]);
  EXPECT_EQ(map.strategy, Strategy::kFlat);
  EXPECT_LE(std::abs(map.audit.residual()), 1e-9 * map.audit.total_in);
  EXPECT_EQ(map.layer_totals.size(), 3u);
  const Mask& mask = *data.train.mask();
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) {
      EXPECT_GE(map.scores(r, c), 0.0);
      if (!mask(r, c)) {
        EXPECT_EQ(map.scores(r, c), 0.0);
      }
    }
}

TEST(MeanRelevance, SingleSampleEqualsItsMap) {
  const DatasetPair data = generate_synthetic(testing::small_synthetic());
  GridDataset one(data.train.mask(), Split::kTrain);
  one.add(data.train[0]);
  const std::vector<int> hidden{2};
  const MlpModel m = make_mlp(data.train.valid_count(), hidden, 1);
  const MeanRelevance mean = mean_relevance_map(m, one, data.train[0].label);
  EXPECT_EQ(mean.samples, 1u);
  EXPECT_EQ(mean.map.scores, lrp_feedforward(m, data.train[0]).scores);
  const Label other =
      data.train[0].label == Label::kClass1 ? Label::kClass2 : Label::kClass1;
  EXPECT_THROW(mean_relevance_map(m, one, other), Error);
}

TEST(MeanRelevance, AveragesPerSampleMaps) {
  const DatasetPair data = generate_synthetic(testing::small_synthetic());
  const std::vector<int> hidden{2};
  const MlpModel m = make_mlp(data.train.valid_count(), hidden, 1);
  const MeanRelevance mean = mean_relevance_map(m, data.validation, Label::kClass2);
  Field sum(12, 16, 0.0);
  std::size_t n = 0;
  for (const auto& s : data.validation.samples()) {
    if (s.label != Label::kClass2) continue;
    const RelevanceMap map = lrp_feedforward(m, s);
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 16; ++c) sum(r, c) += map.scores(r, c);
    ++n;
  }
  EXPECT_EQ(mean.samples, n);
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 16; ++c) EXPECT_NEAR(mean.map.scores(r, c), sum(r, c) / n, 1e-15);
}

TEST(Options, ParseRoundTrip) {
  EXPECT_EQ(parse_hidden_rule(to_string(HiddenRule::kClassRule)), HiddenRule::kClassRule);
  EXPECT_EQ(parse_hidden_rule(to_string(HiddenRule::kUnitSign)), HiddenRule::kUnitSign);
  EXPECT_EQ(parse_esn_split(to_string(EsnSplit::kValueWeighted)), EsnSplit::kValueWeighted);
  EXPECT_THROW(parse_hidden_rule("bogus"), ConfigError);
  EXPECT_THROW(parse_esn_split("bogus"), ConfigError);
}

}  // namespace
}  // namespace lrplab
