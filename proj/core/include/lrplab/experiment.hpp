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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrplab/checkpoint.hpp"
#include "lrplab/datagen.hpp"
#include "lrplab/harness.hpp"
#include "lrplab/key_value.hpp"
#include "lrplab/lrp.hpp"
#include "lrplab/models.hpp"
#include "lrplab/preprocess.hpp"
#include "lrplab/residual.hpp"
#include "lrplab/training.hpp"

namespace lrplab {

enum class ModelKind { kMlp, kCnn, kEsn };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

struct DataSpec {
  std::string source = "synthetic";  // or "csv"
  SyntheticConfig synthetic;
  std::filesystem::path values_path;
  std::filesystem::path mask_path;
  std::filesystem::path targets_path;
  double train_fraction = 0.8;
  LoadOptions load;
};

// One fully resolved experiment. Every field has a config key; see
// from_config for the names.
struct ExperimentSpec {
  ModelKind model = ModelKind::kMlp;
  Strategy strategy = Strategy::kFlat;
  DataSpec data;
  TrainConfig train;
  std::vector<int> mlp_hidden{2};
  double mlp_init_scale = 0.0;  // 0: Glorot uniform; > 0: normal with this std
  CnnTopology cnn;
  std::uint64_t model_seed = 3;
  EsnConfig esn;
  double ridge = 1e-6;
  int piece_size = 96;
  std::uint64_t permutation_seed = 11;
  bool dummy_first = true;
  LrpOptions lrp;
  Label map_label = Label::kClass1;
  Split map_split = Split::kValidation;
  RegionSpec left_square{40, 59, 15, 34};
  RegionSpec right_square{40, 59, 65, 84};
  RegionSpec gateway{40, 59, 48, 52};
  std::filesystem::path output_dir;

  // Unknown keys are rejected so that typos do not pass silently.
  static ExperimentSpec from_config(const KeyValueConfig& config);
  KeyValueConfig to_config() const;
  void validate() const;
};

struct RunManifest {
  KeyValueConfig config;
  std::string tool_version;
  std::string started;
  std::string finished;
  std::int64_t parameter_count = 0;
  Metrics metrics;
  std::optional<RegionRatios> ratios;
  std::optional<double> gateway;
  std::optional<double> stripe_horizontal;
  std::optional<double> stripe_vertical;
  std::optional<double> residual_first_step;  // ESN: mean R(1)
  RelevanceAudit audit;
  std::size_t map_samples = 0;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> artifacts;  // role -> file name
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

// Pipeline stages. Failures are rethrown as StageError naming the stage.
DatasetPair load_data(const ExperimentSpec& spec);
FeedingPlan feeding_plan(const ExperimentSpec& spec, const Mask& mask);
Model build_model(const ExperimentSpec& spec, const Mask& mask);

struct TrainedModel {
  Model model;
  std::vector<EpochRecord> history;
};

TrainedModel train_model(const ExperimentSpec& spec, const DatasetPair& data);
EvalResult evaluate_model(const ExperimentSpec& spec, const Model& model,
                          const GridDataset& dataset);
MeanRelevance explain_model(const ExperimentSpec& spec, const Model& model,
                            const DatasetPair& data);

struct RunOptions {
  bool write_artifacts = true;
  bool compute_relevance = true;
};

struct ExperimentResult {
  RunManifest manifest;
  Model model;
  std::vector<EpochRecord> history;
  std::optional<MeanRelevance> relevance;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

// Runs `base` once per value of `key`, each in output_dir/<key>=<value>.
// Writes sweep_summary.csv to the base output directory.
std::vector<ExperimentResult> run_sweep(const KeyValueConfig& base, const std::string& key,
                                        std::span<const std::string> values,
                                        const RunOptions& options = {});

struct LeakRateRow {
  double alpha = 0.0;
  FirstStepResidual analytic;
  std::optional<double> empirical;
  std::optional<double> accuracy_val;
};

// Analytic residual curves for every alpha; when `empirical` is set also
// trains an ESN per alpha and records its mean residual trace.
std::vector<LeakRateRow> leak_rate_analysis(const KeyValueConfig& base,
                                            std::span<const double> alphas,
                                            bool empirical);

}  // namespace lrplab
