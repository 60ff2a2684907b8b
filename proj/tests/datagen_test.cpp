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
#include <filesystem>
#include <fstream>
#include <memory>

#include <gtest/gtest.h>

#include "lrplab/datagen.hpp"
#include "lrplab/error.hpp"
#include "test_support.hpp"

namespace lrplab {
namespace {

using testing::make_sample;
using testing::temp_dir;

GridDataset sequential_dataset(int n) {
  auto mask = std::make_shared<const Mask>(2, 2, 1);
  GridDataset ds(mask, Split::kTrain);
  for (int i = 0; i < n; ++i) {
    GridSample s{Field(2, 2, static_cast<double>(i)), mask, i % 2 ? -1.0 : 1.0,
                 i % 2 ? Label::kClass2 : Label::kClass1};
    ds.add(s);
  }
  return ds;
}

double region_mean(const GridSample& s, const RegionSpec& r) {
  double sum = 0.0;
  for (int i = r.row_begin; i <= r.row_end; ++i)
    for (int j = r.col_begin; j <= r.col_end; ++j) sum += s.values(i, j);
  return sum / r.cell_count();
}

TEST(Synthetic, DefaultSizes) {
  const SyntheticConfig cfg;
  const DatasetPair d = generate_synthetic(cfg);
  EXPECT_EQ(d.train.size(), 400u);
  EXPECT_EQ(d.validation.size(), 100u);
  EXPECT_EQ(d.train.count(Label::kClass1), 200u);
  EXPECT_EQ(d.validation.count(Label::kClass2), 50u);
  EXPECT_EQ(d.train.split(), Split::kTrain);
  EXPECT_EQ(d.validation.split(), Split::kValidation);
}

TEST(Synthetic, ValidCellCountMatchesMaskAndClosedForm) {
  const SyntheticConfig cfg;
  const Mask mask = make_synthetic_mask(cfg);
  int by_hand = 0;
  for (int r = 0; r < 100; ++r)
    for (int c = 0; c < 100; ++c)
      by_hand += (c < 48 || c > 52 || (r >= 40 && r <= 59)) ? 1 : 0;
  EXPECT_EQ(by_hand, 9600);
  EXPECT_EQ(count_valid(mask), 9600);
  EXPECT_EQ(cfg.expected_valid_count(), 9600);
}

TEST(Synthetic, ZeroNoiseClassPatterns) {
  SyntheticConfig cfg;
  cfg.noise_low = cfg.noise_high = 0.0;
  cfg.n_train_per_class = 2;
  cfg.n_val_per_class = 1;
  const DatasetPair d = generate_synthetic(cfg);
  for (const auto& s : d.train.samples()) {
    const double left = region_mean(s, cfg.left_square);
    EXPECT_EQ(left, s.label == Label::kClass1 ? 1.0 : -1.0);
    EXPECT_EQ(region_mean(s, cfg.right_square), 1.0);
    EXPECT_EQ(s.values(0, 0), 0.0);
    EXPECT_EQ(s.target, s.label == Label::kClass1 ? 1.0 : -1.0);
  }
  const Field comp = composite_mean(d.train, Label::kClass1);
  EXPECT_EQ(comp(45, 20), 1.0);
  EXPECT_EQ(comp(45, 70), 1.0);
  EXPECT_EQ(comp(10, 10), 0.0);
  EXPECT_TRUE(std::isnan(comp(0, 50)));
}

TEST(Synthetic, NoiseBoundsOnValidCellsAndZeroOnBarrier) {
  const auto cfg = testing::small_synthetic();
  const DatasetPair d = generate_synthetic(cfg);
  const Mask& mask = *d.train.mask();
  for (const auto& s : d.train.samples()) {
    for (int r = 0; r < s.rows(); ++r) {
      for (int c = 0; c < s.cols(); ++c) {
        const double base = cfg.left_square.contains(r, c)
                                ? (s.label == Label::kClass1 ? 1.0 : -1.0)
                                : (cfg.right_square.contains(r, c) ? 1.0 : 0.0);
        if (mask(r, c)) {
          EXPECT_GE(s.values(r, c) - base, -0.5);
          EXPECT_LT(s.values(r, c) - base, 0.5);
        } else {
          EXPECT_EQ(s.values(r, c), 0.0);
        }
      }
    }
  }
}

TEST(Synthetic, DeterministicForSeed) {
  const auto cfg = testing::small_synthetic(8);
  const DatasetPair a = generate_synthetic(cfg);
  const DatasetPair b = generate_synthetic(cfg);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].values, b.train[i].values);
  }
  const DatasetPair c = generate_synthetic(testing::small_synthetic(9));
  EXPECT_NE(a.train[0].values, c.train[0].values);
}

TEST(Synthetic, SharedMask) {
  const DatasetPair d = generate_synthetic(testing::small_synthetic());
  for (const auto& s : d.train.samples()) EXPECT_EQ(s.mask.get(), d.train.mask().get());
  EXPECT_EQ(*d.train.mask(), *d.validation.mask());
}

TEST(Synthetic, DefaultClass2CompositeNearMinusOne) {
  const DatasetPair d = generate_synthetic(SyntheticConfig{});
  const Field comp = composite_mean(d.train, Label::kClass2);
  double sum = 0.0;
  const RegionSpec left{40, 59, 15, 34};
  for (int r = left.row_begin; r <= left.row_end; ++r)
    for (int c = left.col_begin; c <= left.col_end; ++c) sum += comp(r, c);
  EXPECT_NEAR(sum / left.cell_count(), -1.0, 0.05);
}

TEST(Synthetic, ValidationRejectsBadConfig) {
  SyntheticConfig cfg;
  cfg.noise_low = 1.0;
  cfg.noise_high = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SyntheticConfig{};
  cfg.left_square = {90, 110, 0, 5};
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
  cfg = SyntheticConfig{};
  cfg.n_train_per_class = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Composite, SymmetricPairCancels) {
  auto mask = std::make_shared<const Mask>(2, 2, 1);
  GridDataset ds(mask, Split::kTrain);
  Field v(2, 2);
  v(0, 0) = 0.3;
  v(0, 1) = -1.2;
  v(1, 0) = 2.0;
  v(1, 1) = 0.0;
  Field neg = v;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) neg(r, c) = -v(r, c);
  ds.add({v, mask, 1.0, Label::kClass1});
  ds.add({neg, mask, 1.0, Label::kClass1});
  const Field comp = composite_mean(ds, Label::kClass1);
  for (double x : comp.storage()) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(composite_mean(ds, Label::kClass2), ConfigError);
}

TEST(Dataset, RejectsForeignGeometry) {
  auto mask = std::make_shared<const Mask>(2, 2, 1);
  GridDataset ds(mask, Split::kTrain);
  EXPECT_THROW(ds.add(make_sample(Field(3, 2, 0.0), Mask(3, 2, 1))), ShapeError);
}

TEST(Split, ExamplesFromFractions) {
  auto s = split_chronological(sequential_dataset(1041), 0.8);
  EXPECT_EQ(s.train.size(), 832u);
  EXPECT_EQ(s.validation.size(), 209u);
  EXPECT_FALSE(s.warning);
  EXPECT_EQ(s.train[0].values(0, 0), 0.0);
  EXPECT_EQ(s.validation[0].values(0, 0), 832.0);

  s = split_chronological(sequential_dataset(10), 0.5);
  EXPECT_EQ(s.train.size(), 5u);
  EXPECT_EQ(s.validation.size(), 5u);

  s = split_chronological(sequential_dataset(1), 0.8);
  EXPECT_EQ(s.train.size(), 1u);
  EXPECT_EQ(s.validation.size(), 0u);
  EXPECT_TRUE(s.warning);
}

TEST(Split, RejectsFractionOutOfRange) {
  const auto ds = sequential_dataset(4);
  EXPECT_THROW(split_chronological(ds, 0.0), ConfigError);
  EXPECT_THROW(split_chronological(ds, 1.0), ConfigError);
  EXPECT_THROW(split_chronological(ds, -0.2), ConfigError);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

TEST(LoadCsv, NeutralSamplesDropped) {
  const auto dir = temp_dir("load_neutral");
  std::string values;
  for (int s = 0; s < 3; ++s)
    for (int r = 0; r < 4; ++r) values += "1,2,3,4\n";
  write_text(dir / "v.csv", values);
  write_text(dir / "m.csv", "1,1,1,1\n1,1,1,1\n1,1,1,1\n1,1,1,1\n");
  write_text(dir / "t.csv", "0.7\n-0.9\n0.1\n");
  const GridDataset ds = load_grid_csv(dir / "v.csv", dir / "m.csv", dir / "t.csv");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].label, Label::kClass1);
  EXPECT_EQ(ds[1].label, Label::kClass2);
  EXPECT_EQ(ds.valid_count(), 16);

  LoadOptions keep_all;
  keep_all.neutral_threshold = 0.0;
  EXPECT_EQ(load_grid_csv(dir / "v.csv", dir / "m.csv", dir / "t.csv", keep_all).size(), 3u);
}

LoadErrorKind load_error_kind(const std::filesystem::path& dir) {
  try {
    load_grid_csv(dir / "v.csv", dir / "m.csv", dir / "t.csv");
  } catch (const LoadError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no LoadError";
  return LoadErrorKind::kParse;
}

TEST(LoadCsv, DistinctErrors) {
  const auto dir = temp_dir("load_errors");
  write_text(dir / "m.csv", "1,1\n1,1\n");
  write_text(dir / "t.csv", "1\n");
  EXPECT_EQ(load_error_kind(dir), LoadErrorKind::kMissingFile);

  write_text(dir / "v.csv", "1,2\n3,x\n");
  EXPECT_EQ(load_error_kind(dir), LoadErrorKind::kParse);

  write_text(dir / "v.csv", "1,2,3\n3,4,5\n");
  EXPECT_EQ(load_error_kind(dir), LoadErrorKind::kDimension);

  write_text(dir / "v.csv", "1,2\n3,4\n5,6\n");
  EXPECT_EQ(load_error_kind(dir), LoadErrorKind::kDimension);
}

TEST(LoadCsv, RoundTripIsBitExact) {
  const auto dir = temp_dir("load_roundtrip");
  const DatasetPair d = generate_synthetic(testing::small_synthetic());
  write_grid_csv(d.train, dir / "v.csv", dir / "m.csv", dir / "t.csv");
  LoadOptions opts;
  opts.neutral_threshold = 0.0;
  const GridDataset back = load_grid_csv(dir / "v.csv", dir / "m.csv", dir / "t.csv", opts);
  ASSERT_EQ(back.size(), d.train.size());
  EXPECT_EQ(*back.mask(), *d.train.mask());
  const Mask& mask = *d.train.mask();
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].target, d.train[i].target);
    for (int r = 0; r < mask.rows(); ++r)
      for (int c = 0; c < mask.cols(); ++c)
        if (mask(r, c)) {
          ASSERT_EQ(back[i].values(r, c), d.train[i].values(r, c));
        }
  }
}

}  // namespace
}  // namespace lrplab
