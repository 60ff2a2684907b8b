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
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lrplab/datagen.hpp"
#include "lrplab/models.hpp"
#include "lrplab/preprocess.hpp"

namespace lrplab {

enum class Optimizer { kSgd, kAdam };

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 500;
  int batch_size = 32;
  double l1_coeff = 0.0;
  std::uint64_t seed = 7;
  Optimizer optimizer = Optimizer::kAdam;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double mse = 0.0;         // mean over the epoch's batches
  double l1_penalty = 0.0;  // at the end of the epoch
  double total = 0.0;
};

template <typename M>
struct TrainResult {
  M model;
  std::vector<EpochRecord> history;
};

// Flat parameter vectors. Order: per layer (or stage) weights in Eigen
// storage order, then biases. Only weights are penalized.
Eigen::VectorXd get_parameters(const MlpModel& model);
Eigen::VectorXd get_parameters(const ConvModel& model);
void set_parameters(MlpModel& model, const Eigen::VectorXd& params);
void set_parameters(ConvModel& model, const Eigen::VectorXd& params);
Eigen::VectorXd penalty_mask(const MlpModel& model);
Eigen::VectorXd penalty_mask(const ConvModel& model);

// Sum of |w| over penalized weights.
double l1_norm(const MlpModel& model);
double l1_norm(const ConvModel& model);

// Adds scale * dY/dtheta to `grad` (flat order above).
void accumulate_gradient(const MlpModel& model, const LayerTrace& trace,
                         double scale, Eigen::VectorXd& grad);
void accumulate_gradient(const ConvModel& model, const LayerTrace& trace,
                         double scale, Eigen::VectorXd& grad);

// Minimizes mean squared error + l1_coeff * sum |w| with minibatches.
// Deterministic for a fixed config. Throws TrainingError on divergence.
TrainResult<MlpModel> train_feedforward(MlpModel model, const GridDataset& train,
                                        const TrainConfig& config);
TrainResult<ConvModel> train_feedforward(ConvModel model, const GridDataset& train,
                                         const TrainConfig& config);

// Model inputs per preprocessing contract.
Eigen::VectorXd model_input(const MlpModel& model, const GridSample& sample);
Eigen::VectorXd model_input(const ConvModel& model, const GridSample& sample);

void write_loss_history(const std::filesystem::path& path,
                        std::span<const EpochRecord> history);

// Solves (X^T X + ridge * I) w = X^T y with an unpenalized bias column.
// Throws NumericalError when the normal matrix is singular.
Readout fit_readout(const Eigen::MatrixXd& final_states,
                    const Eigen::VectorXd& targets, double ridge);

Eigen::MatrixXd collect_final_states(const EsnModel& model,
                                     const GridDataset& dataset,
                                     const FeedingPlan& plan);

EsnModel train_esn_readout(EsnModel model, const GridDataset& train,
                           const FeedingPlan& plan, double ridge);

struct EvalResult {
  double mse = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

EvalResult evaluate_predictions(std::span<const double> predictions,
                                std::span<const double> targets);

std::vector<double> predict(const MlpModel& model, const GridDataset& dataset);
std::vector<double> predict(const ConvModel& model, const GridDataset& dataset);
std::vector<double> predict(const EsnModel& model, const GridDataset& dataset,
                            const FeedingPlan& plan);

EvalResult evaluate(const MlpModel& model, const GridDataset& dataset);
EvalResult evaluate(const ConvModel& model, const GridDataset& dataset);
EvalResult evaluate(const EsnModel& model, const GridDataset& dataset,
                    const FeedingPlan& plan);

// mse excludes any regularization penalty.
struct Metrics {
  double mse_train = 0.0;
  double mse_val = 0.0;
  double accuracy_train = 0.0;
  double accuracy_val = 0.0;
};

Metrics make_metrics(const EvalResult& train, const EvalResult& validation);

struct GradientCheckOptions {
  int max_parameters = 200;
  double step = 1e-5;
  std::uint64_t seed = 0;
};

// Largest relative difference between backprop and central finite
// differences of the prediction over a random subset of parameters:
// |g - g_fd| / max(|g|, |g_fd|, 1e-6).
double gradient_check(const MlpModel& model, const Eigen::VectorXd& input,
                      const GradientCheckOptions& options = {});
double gradient_check(const ConvModel& model, const Eigen::VectorXd& input,
                      const GradientCheckOptions& options = {});
double gradient_check(const MlpModel& model, const GridSample& sample,
                      const GradientCheckOptions& options = {});
double gradient_check(const ConvModel& model, const GridSample& sample,
                      const GradientCheckOptions& options = {});

}  // namespace lrplab
