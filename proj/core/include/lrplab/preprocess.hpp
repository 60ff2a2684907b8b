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
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lrplab/datagen.hpp"
#include "lrplab/grid.hpp"
#include "lrplab/relevance_map.hpp"

namespace lrplab {

struct FlatVector {
  Eigen::VectorXd values;
  std::vector<Cell> index_map;  // vector position -> grid cell, row-major
};

FlatVector flatten_valid(const GridSample& sample);

struct PaddedGrid {
  Field values;
  int source_rows = 0;
  int source_cols = 0;
  int pad_rows() const noexcept { return values.rows() - source_rows; }
  int pad_cols() const noexcept { return values.cols() - source_cols; }
};

// Smallest n' >= n with (n' - kernel) divisible by stride.
int padded_extent(int n, int kernel, int stride);

// Invalid cells become 0; zero rows/cols are appended at the bottom/right.
PaddedGrid pad_for_conv(const GridSample& sample, int kernel, int stride);

// Fixed ordering of the valid cells shared by every sample of an experiment.
// order[p] is the flat (row-major valid) index placed at position p.
struct PermutationSpec {
  std::uint64_t seed = 0;
  std::vector<int> order;

  static PermutationSpec identity(int n);
  static PermutationSpec random(int n, std::uint64_t seed);
  std::vector<int> inverse() const;
  bool is_bijection() const;
};

// Everything needed to map step relevances back onto the grid.
struct SequenceLayout {
  Strategy strategy = Strategy::kColumnwise;
  int rows = 0;
  int cols = 0;
  int n_valid = 0;
  bool dummy_first = true;
  int piece_size = 0;           // piecewise only
  int trailing_pad_count = 0;   // piecewise only
  std::shared_ptr<const PermutationSpec> permutation;  // piecewise only

  int data_steps() const noexcept;
  int steps() const noexcept { return data_steps() + (dummy_first ? 1 : 0); }
  int step_width() const noexcept;
};

// Row t holds u(t+1). All rows have the same width d.
struct InputSequence {
  Eigen::MatrixXd steps;
  SequenceLayout layout;

  int length() const noexcept { return static_cast<int>(steps.rows()); }
  int width() const noexcept { return static_cast<int>(steps.cols()); }
};

InputSequence slice_columns(const GridSample& sample, bool dummy_first = true);
InputSequence slice_rows(const GridSample& sample, bool dummy_first = true);
InputSequence slice_pieces(const GridSample& sample, int piece_size,
                           std::shared_ptr<const PermutationSpec> permutation,
                           bool dummy_first = true);

// Experiment-wide choice of feeding strategy for ESN models.
struct FeedingPlan {
  Strategy strategy = Strategy::kColumnwise;
  int piece_size = 96;
  std::shared_ptr<const PermutationSpec> permutation;
  bool dummy_first = true;

  // Builds the shared permutation when the strategy needs one.
  static FeedingPlan make(Strategy strategy, const Mask& mask, int piece_size,
                          std::uint64_t permutation_seed);
};

InputSequence make_sequence(const GridSample& sample, const FeedingPlan& plan);

// Inverse of the sequence layouts: drops the dummy step, trailing pad slots
// and zero-filled invalid positions, undoes the permutation, and records
// what was dropped in the audit.
RelevanceMap reassemble_relevance(const Eigen::MatrixXd& step_relevance,
                                  const SequenceLayout& layout,
                                  const Mask& mask);

RelevanceMap reassemble_flat(const Eigen::VectorXd& relevance,
                             const std::vector<Cell>& index_map,
                             const Mask& mask);

RelevanceMap reassemble_padded(const Field& relevance, const Mask& mask);

// Places grid values into a step layout; dummy, pad and invalid slots get 0.
Eigen::MatrixXd scatter_to_steps(const Field& map, const SequenceLayout& layout,
                                 const Mask& mask);

}  // namespace lrplab
