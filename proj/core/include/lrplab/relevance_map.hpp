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

#include <string>
#include <string_view>
#include <vector>

#include "lrplab/grid.hpp"

namespace lrplab {

// How a 2-D sample is presented to a model.
enum class Strategy {
  kFlat,        // valid cells as one vector (MLP)
  kPadded,      // zero-filled, zero-padded grid (CNN)
  kColumnwise,  // one ESN step per column
  kRowwise,     // one ESN step per row
  kPiecewise,   // permuted valid cells cut into equal pieces
};

std::string_view to_string(Strategy strategy) noexcept;
Strategy parse_strategy(std::string_view name);
bool is_sequence_strategy(Strategy strategy) noexcept;

// Bookkeeping for where the starting relevance ended up. All quantities are
// in relevance units; `residual()` is zero up to rounding when the
// propagation is conservative.
struct RelevanceAudit {
  double total_in = 0.0;           // starting relevance |Y|
  double attributed = 0.0;         // sum of the map over valid cells
  double dummy_absorbed = 0.0;     // taken by the all-ones first step
  double pad_discarded = 0.0;      // landed on appended zeros
  double invalid_discarded = 0.0;  // landed on zero-filled invalid cells
  double sunk = 0.0;               // zero-denominator columns

  double residual() const noexcept {
    return total_in - attributed - dummy_absorbed - pad_discarded -
           invalid_discarded - sunk;
  }
};

struct RelevanceMap {
  Field scores;  // invalid cells hold exactly 0
  Strategy strategy = Strategy::kFlat;
  RelevanceAudit audit;
  // Relevance totals per layer, output first, with relevance sunk above each
  // layer. Empty for sequence models.
  std::vector<double> layer_totals;
  std::vector<double> layer_sunk_above;
  std::vector<std::string> warnings;

  double total() const noexcept;
};

}  // namespace lrplab
