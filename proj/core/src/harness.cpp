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

#include "lrplab/harness.hpp"

#include <cmath>
#include <vector>

#include "lrplab/error.hpp"

namespace lrplab {

namespace {

void check_geometry(const Field& scores, const Mask& mask) {
  if (scores.rows() != mask.rows() || scores.cols() != mask.cols()) {
    throw ShapeError("relevance map and mask differ in shape");
  }
}

void check_region(const RegionSpec& region, const Mask& mask, const char* name) {
  if (region.empty() || !region.fits(mask.rows(), mask.cols())) {
    throw ConfigError(name, "region does not lie on the grid");
  }
}

double region_sum(const Field& scores, const Mask& mask, const RegionSpec& region) {
  double s = 0.0;
  for (int r = region.row_begin; r <= region.row_end; ++r)
    for (int c = region.col_begin; c <= region.col_end; ++c)
      if (mask(r, c)) s += scores(r, c);
  return s;
}

}  // namespace

RegionRatios region_ratios(const Field& scores, const Mask& mask,
                           const RegionSpec& left, const RegionSpec& right) {
  check_geometry(scores, mask);
  check_region(left, mask, "region.left");
  check_region(right, mask, "region.right");
  const double total = region_sum(scores, mask, {0, mask.rows() - 1, 0, mask.cols() - 1});
  const double l = region_sum(scores, mask, left);
  const double both = l + region_sum(scores, mask, right);
  if (total == 0.0) throw NumericalError("relevance map sums to zero");
  if (both == 0.0) throw NumericalError("no relevance inside the squares");
  return {both / total, l / both};
}

double gateway_statistic(const Field& scores, const Mask& mask, const RegionSpec& gateway) {
  check_geometry(scores, mask);
  check_region(gateway, mask, "region.gateway");
  double gate_sum = 0.0, all_sum = 0.0;
  int gate_n = 0, all_n = 0;
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (!mask(r, c)) continue;
      all_sum += scores(r, c);
      ++all_n;
      if (gateway.contains(r, c)) {
        gate_sum += scores(r, c);
        ++gate_n;
      }
    }
  }
  if (gate_n == 0) throw ConfigError("region.gateway", "gateway has no valid cells");
  const double mean_all = all_sum / all_n;
  if (mean_all == 0.0) throw NumericalError("mean relevance over valid cells is zero");
  return (gate_sum / gate_n) / mean_all;
}

double stripe_statistic(const Field& scores, const Mask& mask, StripeAxis axis) {
  check_geometry(scores, mask);
  const bool by_row = axis == StripeAxis::kHorizontal;
  const int bands = by_row ? mask.rows() : mask.cols();
  std::vector<double> sum(static_cast<std::size_t>(bands), 0.0);
  std::vector<int> count(static_cast<std::size_t>(bands), 0);
  double total = 0.0;
  int n = 0;
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (!mask(r, c)) continue;
      const auto b = static_cast<std::size_t>(by_row ? r : c);
      sum[b] += scores(r, c);
      ++count[b];
      total += scores(r, c);
      ++n;
    }
  }
  if (n == 0) throw NumericalError("map has no valid cells");
  const double mean = total / n;
  double ss_total = 0.0;
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c)
      if (mask(r, c)) ss_total += (scores(r, c) - mean) * (scores(r, c) - mean);
  if (!(ss_total > 0.0)) throw NumericalError("constant map has no stripes to measure");
  double ss_between = 0.0;
  for (std::size_t b = 0; b < sum.size(); ++b) {
    if (count[b] == 0) continue;
    const double m = sum[b] / count[b] - mean;
    ss_between += count[b] * m * m;
  }
  return ss_between / ss_total;
}

}  // namespace lrplab
