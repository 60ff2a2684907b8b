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

#include "lrplab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "lrplab/csv_io.hpp"
#include "lrplab/error.hpp"
#include "lrplab/rng.hpp"

namespace lrplab {

GridDataset::GridDataset(std::shared_ptr<const Mask> mask, Split split)
    : mask_(std::move(mask)), split_(split) {
  if (!mask_) throw ShapeError("dataset requires a mask");
}

void GridDataset::add(GridSample sample) {
  if (!mask_) throw ShapeError("dataset has no mask");
  if (sample.values.rows() != mask_->rows() ||
      sample.values.cols() != mask_->cols()) {
    throw ShapeError("sample dimensions differ from dataset mask");
  }
  if (!sample.mask) {
    sample.mask = mask_;
  } else if (sample.mask != mask_ && *sample.mask != *mask_) {
    throw ShapeError("sample mask differs from dataset mask");
  }
  sample.mask = mask_;
  samples_.push_back(std::move(sample));
}

std::size_t GridDataset::count(Label label) const noexcept {
  std::size_t n = 0;
  for (const auto& s : samples_) n += s.label == label ? 1 : 0;
  return n;
}

void SyntheticConfig::validate() const {
  if (height < 1) throw ConfigError("height", "must be >= 1");
  if (width < 1) throw ConfigError("width", "must be >= 1");
  if (!(noise_low <= noise_high)) {
    throw ConfigError("noise_low", "must not exceed noise_high");
  }
  auto check_region = [&](const RegionSpec& r, const char* name) {
    if (r.empty()) throw ConfigError(name, "empty row or column range");
    if (!r.fits(height, width)) throw ConfigError(name, "outside the grid");
  };
  check_region(left_square, "left_square");
  check_region(right_square, "right_square");
  check_region(barrier(), "barrier_columns");
  check_region(gateway, "gateway");
  if (left_square.intersects(right_square)) {
    throw ConfigError("right_square", "overlaps left_square");
  }
  if (left_square.intersects(barrier())) {
    throw ConfigError("left_square", "overlaps the barrier");
  }
  if (right_square.intersects(barrier())) {
    throw ConfigError("right_square", "overlaps the barrier");
  }
  if (!barrier().contains(gateway)) {
    throw ConfigError("gateway", "must lie inside the barrier");
  }
  if (n_train_per_class < 1) throw ConfigError("n_train_per_class", "must be >= 1");
  if (n_val_per_class < 0) throw ConfigError("n_val_per_class", "must be >= 0");
}

int SyntheticConfig::expected_valid_count() const noexcept {
  return height * width - barrier().cell_count() + gateway.cell_count();
}

Mask make_synthetic_mask(const SyntheticConfig& config) {
  config.validate();
  Mask mask(config.height, config.width, 1);
  const RegionSpec barrier = config.barrier();
  for (int r = 0; r < config.height; ++r) {
    for (int c = 0; c < config.width; ++c) {
      if (barrier.contains(r, c) && !config.gateway.contains(r, c)) mask(r, c) = 0;
    }
  }
  return mask;
}

namespace {

GridSample make_sample(const SyntheticConfig& config,
                       const std::shared_ptr<const Mask>& mask, Label label,
                       std::uint64_t stream) {
  GridSample sample;
  sample.values = Field(config.height, config.width, 0.0);
  sample.mask = mask;
  sample.label = label;
  sample.target = label == Label::kClass1 ? 1.0 : -1.0;

  const double left = label == Label::kClass1 ? config.square_magnitude
                                              : -config.square_magnitude;
  Rng rng = Rng::substream(config.seed, stream);
  for (int r = 0; r < config.height; ++r) {
    for (int c = 0; c < config.width; ++c) {
      // Draw for every cell so the stream layout does not depend on the mask.
      const double noise = rng.uniform(config.noise_low, config.noise_high);
      if (!(*mask)(r, c)) continue;
      double v = noise;
      if (config.left_square.contains(r, c)) v += left;
      if (config.right_square.contains(r, c)) v += config.square_magnitude;
      sample.values(r, c) = v;
    }
  }
  return sample;
}

GridDataset make_split(const SyntheticConfig& config,
                       const std::shared_ptr<const Mask>& mask, Split split,
                       int per_class) {
  GridDataset ds(mask, split);
  const std::uint64_t base = split == Split::kTrain ? 0 : (1ULL << 32);
  std::uint64_t stream = base;
  for (Label label : {Label::kClass1, Label::kClass2}) {
    for (int i = 0; i < per_class; ++i) {
      ds.add(make_sample(config, mask, label, stream++));
    }
  }
  return ds;
}

}  // namespace

DatasetPair generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  auto mask = std::make_shared<const Mask>(make_synthetic_mask(config));
  return {make_split(config, mask, Split::kTrain, config.n_train_per_class),
          make_split(config, mask, Split::kValidation, config.n_val_per_class)};
}

GridDataset load_grid_csv(const std::filesystem::path& values_path,
                          const std::filesystem::path& mask_path,
                          const std::filesystem::path& targets_path,
                          const LoadOptions& options) {
  const auto mask_rows = csv::read_numeric(mask_path);
  if (mask_rows.empty()) {
    throw LoadError(LoadErrorKind::kDimension, "mask file is empty");
  }
  const int rows = static_cast<int>(mask_rows.size());
  const int cols = static_cast<int>(mask_rows.front().size());
  Mask mask(rows, cols, 0);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(mask_rows[r].size()) != cols) {
      throw LoadError(LoadErrorKind::kDimension,
                      "mask row " + std::to_string(r) + " has " +
                          std::to_string(mask_rows[r].size()) +
                          " entries, expected " + std::to_string(cols));
    }
    for (int c = 0; c < cols; ++c) {
      const auto& v = mask_rows[r][c];
      if (!v || (*v != 0.0 && *v != 1.0)) {
        throw LoadError(LoadErrorKind::kParse, "mask entries must be 0 or 1");
      }
      mask(r, c) = *v != 0.0 ? 1 : 0;
    }
  }

  const auto target_rows = csv::read_numeric(targets_path);
  std::vector<double> targets;
  for (const auto& row : target_rows) {
    if (row.size() != 1 || !row[0]) {
      throw LoadError(LoadErrorKind::kParse,
                      "targets file must hold one number per line");
    }
    targets.push_back(*row[0]);
  }

  const auto value_rows = csv::read_numeric(values_path);
  if (value_rows.size() != targets.size() * static_cast<std::size_t>(rows)) {
    throw LoadError(LoadErrorKind::kDimension,
                    "values file has " + std::to_string(value_rows.size()) +
                        " lines, expected " +
                        std::to_string(targets.size() * rows) + " (" +
                        std::to_string(targets.size()) + " samples x " +
                        std::to_string(rows) + " rows)");
  }

  auto shared_mask = std::make_shared<const Mask>(std::move(mask));
  GridDataset ds(shared_mask, Split::kTrain);
  for (std::size_t s = 0; s < targets.size(); ++s) {
    GridSample sample;
    sample.values = Field(rows, cols, 0.0);
    sample.mask = shared_mask;
    sample.target = targets[s];
    sample.label = label_from_target(targets[s]);
    for (int r = 0; r < rows; ++r) {
      const auto& row = value_rows[s * rows + r];
      if (static_cast<int>(row.size()) != cols) {
        throw LoadError(LoadErrorKind::kDimension,
                        "sample " + std::to_string(s) + " row " +
                            std::to_string(r) + " has " +
                            std::to_string(row.size()) + " entries, expected " +
                            std::to_string(cols));
      }
      for (int c = 0; c < cols; ++c) {
        if (!(*shared_mask)(r, c)) continue;
        if (!row[c]) {
          throw LoadError(LoadErrorKind::kParse,
                          "missing value at a valid cell of sample " +
                              std::to_string(s));
        }
        sample.values(r, c) = *row[c];
      }
    }
    if (std::abs(sample.target) < options.neutral_threshold) continue;
    ds.add(std::move(sample));
  }
  return ds;
}

void write_grid_csv(const GridDataset& dataset,
                    const std::filesystem::path& values_path,
                    const std::filesystem::path& mask_path,
                    const std::filesystem::path& targets_path) {
  if (!dataset.mask()) throw ShapeError("dataset has no mask");
  csv::write_mask(mask_path, *dataset.mask());

  // One contiguous values file: stack the samples vertically.
  const int rows = dataset.rows();
  const int cols = dataset.cols();
  Field stacked(static_cast<int>(dataset.size()) * rows, cols, 0.0);
  Mask stacked_mask(stacked.rows(), cols, 0);
  std::vector<std::vector<double>> targets;
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        stacked(static_cast<int>(s) * rows + r, c) = dataset[s].values(r, c);
        stacked_mask(static_cast<int>(s) * rows + r, c) = (*dataset.mask())(r, c);
      }
    }
    targets.push_back({dataset[s].target});
  }
  csv::write_field(values_path, stacked, &stacked_mask, csv::InvalidCells::kEmpty);

  std::filesystem::path tp = targets_path;
  if (tp.has_parent_path()) std::filesystem::create_directories(tp.parent_path());
  std::ofstream out(tp);
  if (!out) throw Error("cannot open '" + tp.string() + "' for writing");
  for (const auto& t : targets) out << csv::format(t[0]) << '\n';
}

ChronologicalSplit split_chronological(const GridDataset& dataset,
                                       double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction", "must lie strictly between 0 and 1");
  }
  if (dataset.empty()) throw ConfigError("dataset", "cannot split an empty dataset");
  const std::size_t n = dataset.size();
  auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(n)));
  n_train = std::max<std::size_t>(n_train, 1);

  ChronologicalSplit out{GridDataset(dataset.mask(), Split::kTrain),
                         GridDataset(dataset.mask(), Split::kValidation),
                         std::nullopt};
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? out.train : out.validation).add(dataset[i]);
  }
  if (out.validation.empty()) {
    out.warning = "validation split is empty (" + std::to_string(n) +
                  " sample(s), fraction " + csv::format(train_fraction) + ")";
  }
  return out;
}

Field composite_mean(const GridDataset& dataset, Label label) {
  Field sum(dataset.rows(), dataset.cols(), 0.0);
  std::size_t count = 0;
  for (const auto& s : dataset.samples()) {
    if (s.label != label) continue;
    ++count;
    for (int r = 0; r < sum.rows(); ++r) {
      for (int c = 0; c < sum.cols(); ++c) sum(r, c) += s.values(r, c);
    }
  }
  if (count == 0) {
    throw ConfigError("label", "no samples of class " +
                                   std::to_string(static_cast<int>(label)));
  }
  const Mask& mask = *dataset.mask();
  for (int r = 0; r < sum.rows(); ++r) {
    for (int c = 0; c < sum.cols(); ++c) {
      sum(r, c) = mask(r, c) ? sum(r, c) / static_cast<double>(count)
                             : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return sum;
}

}  // namespace lrplab
