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

#include "lrplab/preprocess.hpp"

#include <algorithm>
#include <string>

#include "lrplab/error.hpp"
#include "lrplab/rng.hpp"

namespace lrplab {

std::string_view to_string(Strategy strategy) noexcept {
  switch (strategy) {
    case Strategy::kFlat: return "flat";
    case Strategy::kPadded: return "padded";
    case Strategy::kColumnwise: return "column";
    case Strategy::kRowwise: return "row";
    case Strategy::kPiecewise: return "piecewise";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::kFlat, Strategy::kPadded, Strategy::kColumnwise,
                     Strategy::kRowwise, Strategy::kPiecewise}) {
    if (name == to_string(s)) return s;
  }
  if (name == "columnwise" || name == "column-wise") return Strategy::kColumnwise;
  if (name == "rowwise" || name == "row-wise") return Strategy::kRowwise;
  throw ConfigError("strategy", "unknown strategy '" + std::string(name) + "'");
}

bool is_sequence_strategy(Strategy strategy) noexcept {
  return strategy == Strategy::kColumnwise || strategy == Strategy::kRowwise ||
         strategy == Strategy::kPiecewise;
}

double RelevanceMap::total() const noexcept {
  double sum = 0.0;
  for (double v : scores.storage()) sum += v;
  return sum;
}

FlatVector flatten_valid(const GridSample& sample) {
  FlatVector out;
  out.index_map = valid_cells(*sample.mask);
  if (out.index_map.empty()) throw ShapeError("sample has no valid cells");
  out.values.resize(static_cast<Eigen::Index>(out.index_map.size()));
  for (std::size_t i = 0; i < out.index_map.size(); ++i) {
    const Cell& cell = out.index_map[i];
    out.values[static_cast<Eigen::Index>(i)] = sample.values(cell.row, cell.col);
  }
  return out;
}

int padded_extent(int n, int kernel, int stride) {
  if (kernel < 1) throw ConfigError("kernel", "must be >= 1");
  if (stride < 1) throw ConfigError("stride", "must be >= 1");
  if (kernel > n) {
    throw ShapeError("kernel " + std::to_string(kernel) +
                     " exceeds grid extent " + std::to_string(n));
  }
  const int rem = (n - kernel) % stride;
  return rem == 0 ? n : n + (stride - rem);
}

PaddedGrid pad_for_conv(const GridSample& sample, int kernel, int stride) {
  const int rows = padded_extent(sample.rows(), kernel, stride);
  const int cols = padded_extent(sample.cols(), kernel, stride);
  PaddedGrid out{Field(rows, cols, 0.0), sample.rows(), sample.cols()};
  for (int r = 0; r < sample.rows(); ++r) {
    for (int c = 0; c < sample.cols(); ++c) {
      if (sample.valid(r, c)) out.values(r, c) = sample.values(r, c);
    }
  }
  return out;
}

PermutationSpec PermutationSpec::identity(int n) {
  PermutationSpec p;
  p.order.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p.order[static_cast<std::size_t>(i)] = i;
  return p;
}

PermutationSpec PermutationSpec::random(int n, std::uint64_t seed) {
  return PermutationSpec{seed, random_permutation(n, seed)};
}

std::vector<int> PermutationSpec::inverse() const {
  std::vector<int> inv(order.size(), -1);
  for (std::size_t p = 0; p < order.size(); ++p) {
    inv[static_cast<std::size_t>(order[p])] = static_cast<int>(p);
  }
  return inv;
}

bool PermutationSpec::is_bijection() const {
  std::vector<char> seen(order.size(), 0);
  for (int v : order) {
    if (v < 0 || static_cast<std::size_t>(v) >= order.size() || seen[v]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

int SequenceLayout::data_steps() const noexcept {
  switch (strategy) {
    case Strategy::kColumnwise: return cols;
    case Strategy::kRowwise: return rows;
    case Strategy::kPiecewise:
      return piece_size > 0 ? (n_valid + piece_size - 1) / piece_size : 0;
    default: return 0;
  }
}

int SequenceLayout::step_width() const noexcept {
  switch (strategy) {
    case Strategy::kColumnwise: return rows;
    case Strategy::kRowwise: return cols;
    case Strategy::kPiecewise: return piece_size;
    default: return 0;
  }
}

namespace {

SequenceLayout base_layout(const GridSample& sample, Strategy strategy,
                           bool dummy_first) {
  SequenceLayout layout;
  layout.strategy = strategy;
  layout.rows = sample.rows();
  layout.cols = sample.cols();
  layout.n_valid = count_valid(*sample.mask);
  layout.dummy_first = dummy_first;
  return layout;
}

InputSequence allocate(SequenceLayout layout) {
  InputSequence seq;
  seq.steps = Eigen::MatrixXd::Zero(layout.steps(), layout.step_width());
  if (layout.dummy_first) seq.steps.row(0).setOnes();
  seq.layout = std::move(layout);
  return seq;
}

void check_permutation(const SequenceLayout& layout) {
  if (!layout.permutation) throw ConfigError("permutation", "piecewise feeding needs a permutation");
  if (static_cast<int>(layout.permutation->order.size()) != layout.n_valid) {
    throw ShapeError("permutation length " +
                     std::to_string(layout.permutation->order.size()) +
                     " does not match " + std::to_string(layout.n_valid) +
                     " valid cells");
  }
}

}  // namespace

InputSequence slice_columns(const GridSample& sample, bool dummy_first) {
  InputSequence seq = allocate(base_layout(sample, Strategy::kColumnwise, dummy_first));
  const int offset = dummy_first ? 1 : 0;
  for (int c = 0; c < sample.cols(); ++c) {
    for (int r = 0; r < sample.rows(); ++r) {
      if (sample.valid(r, c)) seq.steps(c + offset, r) = sample.values(r, c);
    }
  }
  return seq;
}

InputSequence slice_rows(const GridSample& sample, bool dummy_first) {
  InputSequence seq = allocate(base_layout(sample, Strategy::kRowwise, dummy_first));
  const int offset = dummy_first ? 1 : 0;
  for (int r = 0; r < sample.rows(); ++r) {
    for (int c = 0; c < sample.cols(); ++c) {
      if (sample.valid(r, c)) seq.steps(r + offset, c) = sample.values(r, c);
    }
  }
  return seq;
}

InputSequence slice_pieces(const GridSample& sample, int piece_size,
                           std::shared_ptr<const PermutationSpec> permutation,
                           bool dummy_first) {
  if (piece_size < 1) throw ConfigError("piece_size", "must be >= 1");
  SequenceLayout layout = base_layout(sample, Strategy::kPiecewise, dummy_first);
  layout.piece_size = piece_size;
  layout.permutation = std::move(permutation);
  check_permutation(layout);
  layout.trailing_pad_count =
      layout.data_steps() * piece_size - layout.n_valid;

  const FlatVector flat = flatten_valid(sample);
  InputSequence seq = allocate(std::move(layout));
  const auto& order = seq.layout.permutation->order;
  const int offset = dummy_first ? 1 : 0;
  for (int p = 0; p < seq.layout.n_valid; ++p) {
    seq.steps(p / piece_size + offset, p % piece_size) = flat.values[order[p]];
  }
  return seq;
}

FeedingPlan FeedingPlan::make(Strategy strategy, const Mask& mask,
                              int piece_size, std::uint64_t permutation_seed) {
  if (!is_sequence_strategy(strategy)) {
    throw ConfigError("strategy", std::string(to_string(strategy)) +
                                      " is not an ESN feeding strategy");
  }
  FeedingPlan plan;
  plan.strategy = strategy;
  plan.piece_size = piece_size;
  if (strategy == Strategy::kPiecewise) {
    if (piece_size < 1) throw ConfigError("piece_size", "must be >= 1");
    plan.permutation = std::make_shared<const PermutationSpec>(
        PermutationSpec::random(count_valid(mask), permutation_seed));
  }
  return plan;
}

InputSequence make_sequence(const GridSample& sample, const FeedingPlan& plan) {
  switch (plan.strategy) {
    case Strategy::kColumnwise: return slice_columns(sample, plan.dummy_first);
    case Strategy::kRowwise: return slice_rows(sample, plan.dummy_first);
    case Strategy::kPiecewise:
      return slice_pieces(sample, plan.piece_size, plan.permutation,
                          plan.dummy_first);
    default:
      throw ConfigError("strategy", std::string(to_string(plan.strategy)) +
                                        " is not an ESN feeding strategy");
  }
}

namespace {

void check_steps(const Eigen::MatrixXd& steps, const SequenceLayout& layout,
                 const Mask& mask) {
  if (steps.rows() != layout.steps() || steps.cols() != layout.step_width()) {
    throw ShapeError("step relevance is " + std::to_string(steps.rows()) + "x" +
                     std::to_string(steps.cols()) + ", layout expects " +
                     std::to_string(layout.steps()) + "x" +
                     std::to_string(layout.step_width()));
  }
  if (mask.rows() != layout.rows || mask.cols() != layout.cols) {
    throw ShapeError("mask geometry differs from sequence layout");
  }
}

}  // namespace

RelevanceMap reassemble_relevance(const Eigen::MatrixXd& step_relevance,
                                  const SequenceLayout& layout,
                                  const Mask& mask) {
  check_steps(step_relevance, layout, mask);
  RelevanceMap map;
  map.strategy = layout.strategy;
  map.scores = Field(layout.rows, layout.cols, 0.0);
  RelevanceAudit& audit = map.audit;
  const int offset = layout.dummy_first ? 1 : 0;
  if (layout.dummy_first) audit.dummy_absorbed = step_relevance.row(0).sum();

  auto place = [&](int r, int c, double v) {
    if (mask(r, c)) {
      map.scores(r, c) = v;
      audit.attributed += v;
    } else {
      audit.invalid_discarded += v;
    }
  };

  switch (layout.strategy) {
    case Strategy::kColumnwise:
      for (int c = 0; c < layout.cols; ++c)
        for (int r = 0; r < layout.rows; ++r) place(r, c, step_relevance(c + offset, r));
      break;
    case Strategy::kRowwise:
      for (int r = 0; r < layout.rows; ++r)
        for (int c = 0; c < layout.cols; ++c) place(r, c, step_relevance(r + offset, c));
      break;
    case Strategy::kPiecewise: {
      check_permutation(layout);
      const std::vector<Cell> cells = valid_cells(mask);
      const auto& order = layout.permutation->order;
      const int slots = layout.data_steps() * layout.piece_size;
      for (int p = 0; p < slots; ++p) {
        const double v = step_relevance(p / layout.piece_size + offset,
                                        p % layout.piece_size);
        if (p < layout.n_valid) {
          const Cell& cell = cells[static_cast<std::size_t>(order[p])];
          place(cell.row, cell.col, v);
        } else {
          audit.pad_discarded += v;
        }
      }
      break;
    }
    default:
      throw ConfigError("strategy", "not a sequence layout");
  }
  audit.total_in = audit.attributed + audit.dummy_absorbed +
                   audit.pad_discarded + audit.invalid_discarded;
  return map;
}

RelevanceMap reassemble_flat(const Eigen::VectorXd& relevance,
                             const std::vector<Cell>& index_map,
                             const Mask& mask) {
  if (static_cast<std::size_t>(relevance.size()) != index_map.size()) {
    throw ShapeError("relevance length differs from index map");
  }
  RelevanceMap map;
  map.strategy = Strategy::kFlat;
  map.scores = Field(mask.rows(), mask.cols(), 0.0);
  for (std::size_t i = 0; i < index_map.size(); ++i) {
    const Cell& cell = index_map[i];
    if (!mask(cell.row, cell.col)) throw ShapeError("index map points at an invalid cell");
    map.scores(cell.row, cell.col) = relevance[static_cast<Eigen::Index>(i)];
    map.audit.attributed += relevance[static_cast<Eigen::Index>(i)];
  }
  map.audit.total_in = map.audit.attributed;
  return map;
}

RelevanceMap reassemble_padded(const Field& relevance, const Mask& mask) {
  if (relevance.rows() < mask.rows() || relevance.cols() < mask.cols()) {
    throw ShapeError("padded relevance smaller than the source grid");
  }
  RelevanceMap map;
  map.strategy = Strategy::kPadded;
  map.scores = Field(mask.rows(), mask.cols(), 0.0);
  RelevanceAudit& audit = map.audit;
  for (int r = 0; r < relevance.rows(); ++r) {
    for (int c = 0; c < relevance.cols(); ++c) {
      const double v = relevance(r, c);
      if (r >= mask.rows() || c >= mask.cols()) {
        audit.pad_discarded += v;
      } else if (!mask(r, c)) {
        audit.invalid_discarded += v;
      } else {
        map.scores(r, c) = v;
        audit.attributed += v;
      }
    }
  }
  audit.total_in = audit.attributed + audit.pad_discarded + audit.invalid_discarded;
  return map;
}

Eigen::MatrixXd scatter_to_steps(const Field& map, const SequenceLayout& layout,
                                 const Mask& mask) {
  Eigen::MatrixXd steps = Eigen::MatrixXd::Zero(layout.steps(), layout.step_width());
  check_steps(steps, layout, mask);
  const int offset = layout.dummy_first ? 1 : 0;
  switch (layout.strategy) {
    case Strategy::kColumnwise:
      for (int c = 0; c < layout.cols; ++c)
        for (int r = 0; r < layout.rows; ++r)
          if (mask(r, c)) steps(c + offset, r) = map(r, c);
      break;
    case Strategy::kRowwise:
      for (int r = 0; r < layout.rows; ++r)
        for (int c = 0; c < layout.cols; ++c)
          if (mask(r, c)) steps(r + offset, c) = map(r, c);
      break;
    case Strategy::kPiecewise: {
      check_permutation(layout);
      const std::vector<Cell> cells = valid_cells(mask);
      const auto& order = layout.permutation->order;
      for (int p = 0; p < layout.n_valid; ++p) {
        const Cell& cell = cells[static_cast<std::size_t>(order[p])];
        steps(p / layout.piece_size + offset, p % layout.piece_size) =
            map(cell.row, cell.col);
      }
      break;
    }
    default:
      throw ConfigError("strategy", "not a sequence layout");
  }
  return steps;
}

}  // namespace lrplab
