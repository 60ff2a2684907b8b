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

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lrplab {

enum class CurveKind { kAnalytic, kEmpirical };

// values[t - 1] = R(t) for t = 1..length.
struct ResidualCurve {
  double alpha = 0.0;
  int length = 0;
  std::vector<double> values;
  CurveKind kind = CurveKind::kAnalytic;

  double at(int t) const { return values.at(static_cast<std::size_t>(t - 1)); }
};

// R(t) = exp(-alpha (T - t)). Throws ConfigError unless alpha > 0, T >= 1.
ResidualCurve analytic_residual(double alpha, int length);

// dR/dt = alpha exp(-alpha (T - t)).
ResidualCurve residual_rate(double alpha, int length);

// Share of relevance left for the first step under the two exponent
// conventions: exp(-alpha T) and exp(-alpha (T - 1)).
struct FirstStepResidual {
  double full_length = 0.0;
  double minus_one = 0.0;
};

FirstStepResidual first_step_residual(double alpha, int length);

ResidualCurve empirical_residual(double alpha, const Eigen::VectorXd& mean_residual);

// Long format: alpha, t, value.
void write_residual_curves(const std::filesystem::path& path,
                           std::span<const ResidualCurve> curves);

}  // namespace lrplab
