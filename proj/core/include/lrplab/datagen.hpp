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
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lrplab/grid.hpp"

namespace lrplab {

// Class identifiers. Class 1 carries positive targets, class 2 negative ones.
enum class Label : int { kClass1 = 1, kClass2 = 2 };

inline Label label_from_target(double target) noexcept {
  return target >= 0.0 ? Label::kClass1 : Label::kClass2;
}

struct GridSample {
  Field values;
  std::shared_ptr<const Mask> mask;
  double target = 0.0;
  Label label = Label::kClass1;

  int rows() const noexcept { return values.rows(); }
  int cols() const noexcept { return values.cols(); }
  bool valid(int r, int c) const { return (*mask)(r, c) != 0; }
};

enum class Split { kTrain, kValidation };

// Samples sharing a single mask geometry.
class GridDataset {
 public:
  GridDataset() = default;
  GridDataset(std::shared_ptr<const Mask> mask, Split split);

  // Throws ShapeError if the sample's geometry or mask differs.
  void add(GridSample sample);

  const std::vector<GridSample>& samples() const noexcept { return samples_; }
  const GridSample& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  const std::shared_ptr<const Mask>& mask() const noexcept { return mask_; }
  int rows() const noexcept { return mask_ ? mask_->rows() : 0; }
  int cols() const noexcept { return mask_ ? mask_->cols() : 0; }
  int valid_count() const noexcept { return mask_ ? count_valid(*mask_) : 0; }

  Split split() const noexcept { return split_; }
  void set_split(Split split) noexcept { split_ = split; }

  std::size_t count(Label label) const noexcept;

 private:
  std::shared_ptr<const Mask> mask_;
  Split split_ = Split::kTrain;
  std::vector<GridSample> samples_;
};

struct SyntheticConfig {
  int height = 100;
  int width = 100;
  RegionSpec left_square{40, 59, 15, 34};
  RegionSpec right_square{40, 59, 65, 84};
  double square_magnitude = 1.0;
  double noise_low = -0.5;
  double noise_high = 0.5;
  // Full-height barrier of invalid cells; only row/column extents are used.
  int barrier_col_begin = 48;
  int barrier_col_end = 52;
  RegionSpec gateway{40, 59, 48, 52};
  int n_train_per_class = 200;
  int n_val_per_class = 50;
  std::uint64_t seed = 42;

  RegionSpec barrier() const noexcept {
    return {0, height - 1, barrier_col_begin, barrier_col_end};
  }

  // Throws ConfigError naming the first offending field.
  void validate() const;

  // Closed form H*W - barrier + gateway.
  int expected_valid_count() const noexcept;
};

Mask make_synthetic_mask(const SyntheticConfig& config);

struct DatasetPair {
  GridDataset train;
  GridDataset validation;
};

// Deterministic for a fixed seed. Each dataset holds the class-1 block
// followed by the class-2 block.
DatasetPair generate_synthetic(const SyntheticConfig& config);

struct LoadOptions {
  // Samples with |target| below this are neutral and dropped.
  double neutral_threshold = 0.5;
};

// Loads a dataset from three CSV files:
//   mask:    H lines of W entries, 0 or 1
//   values:  N*H lines of W entries, sample s on lines s*H .. s*H+H-1;
//            invalid cells may be empty or "nan"
//   targets: one target per line
GridDataset load_grid_csv(const std::filesystem::path& values_path,
                          const std::filesystem::path& mask_path,
                          const std::filesystem::path& targets_path,
                          const LoadOptions& options = {});

// Writes the three CSV files read by load_grid_csv. Values are written with
// round-trip precision; invalid cells are left empty.
void write_grid_csv(const GridDataset& dataset,
                    const std::filesystem::path& values_path,
                    const std::filesystem::path& mask_path,
                    const std::filesystem::path& targets_path);

struct ChronologicalSplit {
  GridDataset train;
  GridDataset validation;
  std::optional<std::string> warning;
};

// The first floor(fraction * N) samples (at least one) go to train, the rest
// to validation. Order is preserved.
ChronologicalSplit split_chronological(const GridDataset& dataset,
                                       double train_fraction);

// Cell-wise mean over samples with `label`; invalid cells hold NaN.
Field composite_mean(const GridDataset& dataset, Label label);

}  // namespace lrplab
