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

#include "lrplab/grid.hpp"
#include "lrplab/relevance_map.hpp"

namespace lrplab {

struct RegionRatios {
  double both_over_total = 0.0;
  double left_over_both = 0.0;
};

// Sums are taken over valid cells. Throws NumericalError on a zero total.
RegionRatios region_ratios(const Field& scores, const Mask& mask,
                           const RegionSpec& left, const RegionSpec& right);

// Mean relevance per valid gateway cell over mean per valid cell.
double gateway_statistic(const Field& scores, const Mask& mask,
                         const RegionSpec& gateway);

// kHorizontal measures bands that run along rows (row means differ);
// kVertical measures bands along columns.
enum class StripeAxis { kHorizontal, kVertical };

// Share of the map's variance over valid cells explained by the per-row
// (or per-column) means. 1 for a map constant within each band.
double stripe_statistic(const Field& scores, const Mask& mask, StripeAxis axis);

}  // namespace lrplab
