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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lrplab/datagen.hpp"
#include "lrplab/models.hpp"
#include "lrplab/preprocess.hpp"
#include "lrplab/relevance_map.hpp"

namespace lrplab {

// kPositive keeps max(a*w, 0); kNegative keeps |min(a*w, 0)|.
enum class SignRule { kPositive, kNegative };

inline SignRule sign_rule_for(Label label) noexcept {
  return label == Label::kClass1 ? SignRule::kPositive : SignRule::kNegative;
}

// Rule used below the output unit. kClassRule applies the class rule at
// every layer. kUnitSign lets each hidden unit keep the contributions that
// share the sign of its pre-activation, so a unit driven negative by a
// class-1 input still passes relevance to the inputs that drove it.
enum class HiddenRule { kUnitSign, kClassRule };

std::string_view to_string(HiddenRule rule) noexcept;
HiddenRule parse_hidden_rule(std::string_view name);

// How relevance held by a reservoir unit at step t > 1 is split.
// kLeakWeighted: a (1 - alpha) share stays on the unit's own previous state;
//   the alpha share goes over the input and recurrent contributions.
// kValueWeighted: one z-rule over the carry, input and recurrent values.
enum class EsnSplit { kLeakWeighted, kValueWeighted };

std::string_view to_string(EsnSplit split) noexcept;
EsnSplit parse_esn_split(std::string_view name);

struct LrpOptions {
  HiddenRule hidden = HiddenRule::kUnitSign;
  EsnSplit esn_split = EsnSplit::kLeakWeighted;
  // Overrides the sample label when choosing the class rule.
  std::optional<Label> label;
};

struct LayerRelevance {
  Eigen::VectorXd relevance;  // one entry per input unit
  double sunk = 0.0;          // upstream relevance with an empty share set
};

// Per-unit rules for `pre_activation`-driven hidden layers.
std::vector<SignRule> unit_sign_rules(const Eigen::VectorXd& pre_activation);

// z-rule through one dense connection. `weights` is outputs x inputs and
// `rules` has one entry per output unit.
LayerRelevance lrp_dense(const Eigen::VectorXd& activations,
                         const Eigen::MatrixXd& weights,
                         const Eigen::VectorXd& upstream,
                         std::span<const SignRule> rules);
LayerRelevance lrp_dense(const Eigen::VectorXd& activations,
                         const Eigen::MatrixXd& weights,
                         const Eigen::VectorXd& upstream, SignRule rule);

// Same rule over convolutional connectivity; `activations` is the stage
// input in channel-major order.
LayerRelevance lrp_conv(const Eigen::VectorXd& activations, const Shape3& in_shape,
                        const ConvStage& stage, const Eigen::VectorXd& upstream,
                        std::span<const SignRule> rules);
LayerRelevance lrp_conv(const Eigen::VectorXd& activations, const Shape3& in_shape,
                        const ConvStage& stage, const Eigen::VectorXd& upstream,
                        SignRule rule);

// Relevance of a feedforward model's input vector.
struct FeedforwardRelevance {
  Eigen::VectorXd input;
  double prediction = 0.0;
  double start = 0.0;
  std::vector<double> layer_totals;      // output first, input last
  std::vector<double> layer_sunk_above;  // sunk before reaching that level
  std::vector<std::string> warnings;
};

FeedforwardRelevance lrp_feedforward(const MlpModel& model, const Eigen::VectorXd& input,
                                     Label label, const LrpOptions& options = {});
FeedforwardRelevance lrp_feedforward(const ConvModel& model, const Eigen::VectorXd& input,
                                     Label label, const LrpOptions& options = {});

RelevanceMap lrp_feedforward(const MlpModel& model, const GridSample& sample,
                             const LrpOptions& options = {});
RelevanceMap lrp_feedforward(const ConvModel& model, const GridSample& sample,
                             const LrpOptions& options = {});

struct EsnRelevance {
  Eigen::MatrixXd step_relevance;  // row t: relevance of u(t+1)
  // residual[t]: share of the start relevance held by x(t+1) when the
  // backward pass reaches step t+1.
  Eigen::VectorXd residual;
  double prediction = 0.0;
  double start = 0.0;
  double sunk = 0.0;
  std::vector<std::string> warnings;
};

EsnRelevance lrp_esn(const EsnModel& model, const InputSequence& seq,
                     const StateTrace& trace, double prediction, Label label,
                     const LrpOptions& options = {});
EsnRelevance lrp_esn(const EsnModel& model, const InputSequence& seq, Label label,
                     const LrpOptions& options = {});

RelevanceMap lrp_esn_map(const EsnModel& model, const GridSample& sample,
                         const FeedingPlan& plan, const LrpOptions& options = {});

// Cell-wise mean over the samples of `label`, with audits summed and then
// divided by the sample count.
struct MeanRelevance {
  RelevanceMap map;
  std::size_t samples = 0;
  Eigen::VectorXd mean_residual;  // ESN only
};

MeanRelevance mean_relevance_map(const MlpModel& model, const GridDataset& dataset,
                                 Label label, const LrpOptions& options = {});
MeanRelevance mean_relevance_map(const ConvModel& model, const GridDataset& dataset,
                                 Label label, const LrpOptions& options = {});
MeanRelevance mean_relevance_map(const EsnModel& model, const GridDataset& dataset,
                                 Label label, const FeedingPlan& plan,
                                 const LrpOptions& options = {});

// CSV with empty fields on invalid cells, and an 8-bit PGM.
void write_relevance_map(const std::filesystem::path& csv_path,
                         const std::filesystem::path& pgm_path,
                         const RelevanceMap& map, const Mask& mask);

}  // namespace lrplab
