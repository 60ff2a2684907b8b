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

#include <memory>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "lrplab/error.hpp"
#include "lrplab/preprocess.hpp"
#include "test_support.hpp"

namespace lrplab {
namespace {

using testing::make_sample;

// 5 rows x 6 columns with three invalid cells; values number the cells.
GridSample fig_grid() {
  Mask m(5, 6, 1);
  m(0, 0) = 0;
  m(2, 3) = 0;
  m(4, 5) = 0;
  Field v(5, 6, 0.0);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c) v(r, c) = m(r, c) ? 10.0 * r + c + 1.0 : 99.0;
  return make_sample(v, m);
}

TEST(Flatten, RowMajorValidCells) {
  const GridSample s = fig_grid();
  const FlatVector f = flatten_valid(s);
  ASSERT_EQ(f.values.size(), 27);
  EXPECT_EQ(f.values[0], 2.0);
  EXPECT_EQ(f.values[1], 3.0);
  EXPECT_EQ((f.index_map[0]), (Cell{0, 1}));
  for (int i = 0; i < 27; ++i) {
    const Cell c = f.index_map[i];
    EXPECT_EQ(f.values[i], s.values(c.row, c.col));
  }
}

TEST(Flatten, TwoByTwo) {
  Field v(2, 2);
  v(0, 0) = 1;
  v(0, 1) = 2;
  v(1, 0) = 3;
  v(1, 1) = 4;
  const FlatVector f = flatten_valid(make_sample(v, Mask(2, 2, 1)));
  EXPECT_EQ(f.values, Eigen::Vector4d(1, 2, 3, 4));
}

TEST(Flatten, SyntheticLength) {
  const Mask mask = make_synthetic_mask(SyntheticConfig{});
  EXPECT_EQ(flatten_valid(make_sample(Field(100, 100, 0.0), mask)).values.size(), 9600);
}

TEST(Pad, Extents) {
  EXPECT_EQ(padded_extent(5, 3, 3), 6);
  EXPECT_EQ(padded_extent(6, 3, 3), 6);
  EXPECT_EQ(padded_extent(100, 3, 3), 102);
  EXPECT_EQ(padded_extent(7, 3, 2), 7);
  EXPECT_EQ(padded_extent(8, 3, 2), 9);
  EXPECT_THROW(padded_extent(2, 3, 3), ShapeError);
  EXPECT_THROW(padded_extent(5, 3, 0), ConfigError);
  for (int n = 4; n < 40; ++n)
    for (int k = 1; k <= 4; ++k)
      for (int s = 1; s <= 4; ++s) {
        const int p = padded_extent(n, k, s);
        EXPECT_GE(p, n);
        EXPECT_EQ((p - k) % s, 0);
        if (p > n) {
          EXPECT_NE((p - 1 - k) % s, 0);
        }
      }
}

TEST(Pad, FigureGeometry) {
  const GridSample s = fig_grid();
  const PaddedGrid p = pad_for_conv(s, 3, 3);
  EXPECT_EQ(p.values.rows(), 6);
  EXPECT_EQ(p.values.cols(), 6);
  EXPECT_EQ(p.pad_rows(), 1);
  EXPECT_EQ(p.pad_cols(), 0);
  EXPECT_EQ(p.values(0, 0), 0.0);
  EXPECT_EQ(p.values(0, 1), 2.0);
  for (int c = 0; c < 6; ++c) EXPECT_EQ(p.values(5, c), 0.0);
  EXPECT_THROW(pad_for_conv(s, 0, 3), ConfigError);
}

TEST(Pad, SyntheticTo102) {
  const Mask mask = make_synthetic_mask(SyntheticConfig{});
  const PaddedGrid p = pad_for_conv(make_sample(Field(100, 100, 1.0), mask), 3, 3);
  EXPECT_EQ(p.values.rows(), 102);
  EXPECT_EQ(p.values.cols(), 102);
  EXPECT_EQ(p.values(0, 50), 0.0);
  EXPECT_EQ(p.values(45, 50), 1.0);
  EXPECT_EQ(p.values(101, 0), 0.0);
}

TEST(Slice, ColumnsFigure) {
  const GridSample s = fig_grid();
  const InputSequence seq = slice_columns(s);
  EXPECT_EQ(seq.length(), 7);
  EXPECT_EQ(seq.width(), 5);
  EXPECT_TRUE((seq.steps.row(0).array() == 1.0).all());
  EXPECT_EQ(seq.steps(1, 0), 0.0);  // invalid cell zero-filled
  EXPECT_EQ(seq.steps(1, 1), 11.0);
  EXPECT_EQ(seq.steps(4, 2), 0.0);
  EXPECT_EQ(seq.steps(6, 3), 36.0);
}

TEST(Slice, RowsFigure) {
  const InputSequence seq = slice_rows(fig_grid());
  EXPECT_EQ(seq.length(), 6);
  EXPECT_EQ(seq.width(), 6);
  EXPECT_EQ(seq.steps(1, 0), 0.0);
  EXPECT_EQ(seq.steps(1, 1), 2.0);
  EXPECT_EQ(seq.steps(5, 4), 45.0);
  EXPECT_EQ(seq.steps(5, 5), 0.0);
}

TEST(Slice, SingleCell) {
  Field v(1, 1, 0.7);
  const InputSequence seq = slice_columns(make_sample(v, Mask(1, 1, 1)));
  ASSERT_EQ(seq.length(), 2);
  EXPECT_EQ(seq.steps(0, 0), 1.0);
  EXPECT_EQ(seq.steps(1, 0), 0.7);
  const InputSequence plain = slice_columns(make_sample(v, Mask(1, 1, 1)), false);
  EXPECT_EQ(plain.length(), 1);
}

TEST(Slice, SyntheticColumnwise) {
  const Mask mask = make_synthetic_mask(SyntheticConfig{});
  const InputSequence seq = slice_columns(make_sample(Field(100, 100, 0.0), mask));
  EXPECT_EQ(seq.length(), 101);
  EXPECT_EQ(seq.width(), 100);
  EXPECT_EQ(seq.layout.data_steps(), 100);
}

TEST(Pieces, FigureNeedsTwoPadSlots) {
  const GridSample s = fig_grid();  // 27 valid cells
  auto perm = std::make_shared<const PermutationSpec>(PermutationSpec::random(27, 3));
  const InputSequence seq = slice_pieces(s, 5, perm);
  EXPECT_EQ(seq.layout.trailing_pad_count, 3);
  auto perm2 = std::make_shared<const PermutationSpec>(PermutationSpec::random(28, 3));
  Mask m = *s.mask;
  m(4, 5) = 1;
  const InputSequence seq2 = slice_pieces(make_sample(s.values, m), 5, perm2);
  EXPECT_EQ(seq2.layout.trailing_pad_count, 2);
  EXPECT_EQ(seq2.length(), 7);
  EXPECT_EQ(seq2.steps(6, 3), 0.0);
  EXPECT_EQ(seq2.steps(6, 4), 0.0);
}

TEST(Pieces, TenCellsIdentity) {
  Field v(2, 5);
  for (int i = 0; i < 10; ++i) v(i / 5, i % 5) = i + 1.0;
  auto perm = std::make_shared<const PermutationSpec>(PermutationSpec::identity(10));
  const InputSequence seq = slice_pieces(make_sample(v, Mask(2, 5, 1)), 5, perm);
  EXPECT_EQ(seq.layout.data_steps(), 2);
  EXPECT_EQ(seq.layout.trailing_pad_count, 0);
  EXPECT_EQ(seq.steps(1, 0), 1.0);
  EXPECT_EQ(seq.steps(2, 4), 10.0);
}

TEST(Pieces, PermutationApplied) {
  Field v(1, 4);
  for (int i = 0; i < 4; ++i) v(0, i) = i;
  auto perm = std::make_shared<PermutationSpec>();
  perm->order = {2, 0, 3, 1};
  const InputSequence seq = slice_pieces(make_sample(v, Mask(1, 4, 1)), 4, perm, false);
  EXPECT_EQ(seq.steps.row(0), Eigen::RowVector4d(2, 0, 3, 1));
}

TEST(Pieces, SyntheticDefault) {
  const Mask mask = make_synthetic_mask(SyntheticConfig{});
  const FeedingPlan plan = FeedingPlan::make(Strategy::kPiecewise, mask, 96, 11);
  const InputSequence seq = make_sequence(make_sample(Field(100, 100, 0.0), mask), plan);
  EXPECT_EQ(seq.length(), 101);
  EXPECT_EQ(seq.width(), 96);
  EXPECT_EQ(seq.layout.trailing_pad_count, 0);
}

TEST(Pieces, Errors) {
  const GridSample s = fig_grid();
  auto perm = std::make_shared<const PermutationSpec>(PermutationSpec::identity(27));
  EXPECT_THROW(slice_pieces(s, 0, perm), ConfigError);
  auto wrong = std::make_shared<const PermutationSpec>(PermutationSpec::identity(26));
  EXPECT_ANY_THROW(slice_pieces(s, 5, wrong));
  EXPECT_THROW(FeedingPlan::make(Strategy::kFlat, *s.mask, 5, 1), ConfigError);
}

TEST(Permutation, InverseAndSharing) {
  const PermutationSpec p = PermutationSpec::random(50, 8);
  EXPECT_TRUE(p.is_bijection());
  const auto inv = p.inverse();
  for (int i = 0; i < 50; ++i) EXPECT_EQ(inv[p.order[i]], i);
  const Mask mask = make_synthetic_mask(testing::small_synthetic());
  const FeedingPlan a = FeedingPlan::make(Strategy::kPiecewise, mask, 7, 1);
  const FeedingPlan b = FeedingPlan::make(Strategy::kPiecewise, mask, 7, 2);
  EXPECT_NE(a.permutation->order, b.permutation->order);
  EXPECT_EQ(a.permutation->order.size(), b.permutation->order.size());
  PermutationSpec bad;
  bad.order = {0, 0, 1};
  EXPECT_FALSE(bad.is_bijection());
}

class RoundTrip : public ::testing::TestWithParam<Strategy> {};

TEST_P(RoundTrip, ScatterThenReassembleIsIdentity) {
  const GridSample s = fig_grid();
  Rng rng(12);
  Field map = testing::random_field(5, 6, rng, 0.0, 1.0);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c)
      if (!(*s.mask)(r, c)) map(r, c) = 0.0;
  const FeedingPlan plan = FeedingPlan::make(GetParam(), *s.mask, 4, 5);
  const InputSequence seq = make_sequence(s, plan);
  const Eigen::MatrixXd steps = scatter_to_steps(map, seq.layout, *s.mask);
  const RelevanceMap back = reassemble_relevance(steps, seq.layout, *s.mask);
  EXPECT_EQ(back.scores, map);
  EXPECT_EQ(back.strategy, GetParam());
  EXPECT_EQ(back.audit.pad_discarded, 0.0);
  EXPECT_EQ(back.audit.dummy_absorbed, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Strategies, RoundTrip,
                         ::testing::Values(Strategy::kColumnwise, Strategy::kRowwise,
                                           Strategy::kPiecewise));

TEST(Reassemble, AuditSeparatesDummyPadAndInvalid) {
  const GridSample s = fig_grid();  // 27 valid, p=5 -> 3 pad slots
  auto perm = std::make_shared<const PermutationSpec>(PermutationSpec::random(27, 1));
  const InputSequence seq = slice_pieces(s, 5, perm);
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(seq.length(), seq.width(), 1.0);
  r(0, 0) = 4.0;
  const RelevanceMap map = reassemble_relevance(r, seq.layout, *s.mask);
  EXPECT_DOUBLE_EQ(map.audit.dummy_absorbed, 8.0);
  EXPECT_DOUBLE_EQ(map.audit.pad_discarded, 3.0);
  EXPECT_DOUBLE_EQ(map.audit.attributed, 27.0);
  EXPECT_DOUBLE_EQ(map.total(), 27.0);
  EXPECT_DOUBLE_EQ(map.audit.residual(), 0.0);

  const InputSequence cols = slice_columns(s);
  Eigen::MatrixXd rc = Eigen::MatrixXd::Constant(cols.length(), cols.width(), 0.5);
  const RelevanceMap cm = reassemble_relevance(rc, cols.layout, *s.mask);
  EXPECT_DOUBLE_EQ(cm.audit.dummy_absorbed, 2.5);
  EXPECT_DOUBLE_EQ(cm.audit.invalid_discarded, 1.5);
  EXPECT_DOUBLE_EQ(cm.audit.attributed, 13.5);
  EXPECT_EQ(cm.scores(0, 0), 0.0);
  EXPECT_THROW(reassemble_relevance(Eigen::MatrixXd::Zero(3, 5), cols.layout, *s.mask),
               ShapeError);
}

TEST(Reassemble, FlatAndPadded) {
  const GridSample s = fig_grid();
  const FlatVector f = flatten_valid(s);
  const RelevanceMap fm = reassemble_flat(f.values, f.index_map, *s.mask);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c)
      EXPECT_EQ(fm.scores(r, c), (*s.mask)(r, c) ? s.values(r, c) : 0.0);
  EXPECT_THROW(reassemble_flat(Eigen::VectorXd::Zero(3), f.index_map, *s.mask), ShapeError);

  Field padded(6, 6, 1.0);
  const RelevanceMap pm = reassemble_padded(padded, *s.mask);
  EXPECT_DOUBLE_EQ(pm.audit.pad_discarded, 6.0);
  EXPECT_DOUBLE_EQ(pm.audit.invalid_discarded, 3.0);
  EXPECT_DOUBLE_EQ(pm.audit.attributed, 27.0);
  EXPECT_THROW(reassemble_padded(Field(4, 6), *s.mask), ShapeError);
}

}  // namespace
}  // namespace lrplab
