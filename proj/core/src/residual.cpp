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

#include "lrplab/residual.hpp"

#include <cmath>

#include "lrplab/csv_io.hpp"
#include "lrplab/error.hpp"

namespace lrplab {

namespace {

void check(double alpha, int length) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha", "must be > 0");
  if (length < 1) throw ConfigError("length", "must be >= 1");
}

}  // namespace

ResidualCurve analytic_residual(double alpha, int length) {
  check(alpha, length);
  ResidualCurve c{alpha, length, {}, CurveKind::kAnalytic};
  c.values.reserve(static_cast<std::size_t>(length));
  for (int t = 1; t <= length; ++t) c.values.push_back(std::exp(-alpha * (length - t)));
  return c;
}

ResidualCurve residual_rate(double alpha, int length) {
  ResidualCurve c = analytic_residual(alpha, length);
  for (double& v : c.values) v *= alpha;
  return c;
}

FirstStepResidual first_step_residual(double alpha, int length) {
  check(alpha, length);
  return {std::exp(-alpha * length), std::exp(-alpha * (length - 1))};
}

ResidualCurve empirical_residual(double alpha, const Eigen::VectorXd& mean_residual) {
  ResidualCurve c{alpha, static_cast<int>(mean_residual.size()), {}, CurveKind::kEmpirical};
  c.values.assign(mean_residual.data(), mean_residual.data() + mean_residual.size());
  return c;
}

void write_residual_curves(const std::filesystem::path& path,
                           std::span<const ResidualCurve> curves) {
  std::vector<std::vector<double>> rows;
  for (const ResidualCurve& c : curves) {
    for (int t = 1; t <= c.length; ++t) rows.push_back({c.alpha, static_cast<double>(t), c.at(t)});
  }
  csv::write_table(path, {"alpha", "t", "value"}, rows);
}

}  // namespace lrplab
