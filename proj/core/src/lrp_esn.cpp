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

#include "lrplab/error.hpp"
#include "lrplab/lrp.hpp"

namespace lrplab {

namespace {

inline double keep(SignRule rule, double z) noexcept {
  return rule == SignRule::kPositive ? (z > 0.0 ? z : 0.0) : (z < 0.0 ? -z : 0.0);
}

SignRule unit_rule(HiddenRule hidden, SignRule class_rule, double pre) noexcept {
  if (hidden == HiddenRule::kClassRule) return class_rule;
  return pre >= 0.0 ? SignRule::kPositive : SignRule::kNegative;
}

}  // namespace

EsnRelevance lrp_esn(const EsnModel& model, const InputSequence& seq,
                     const StateTrace& trace, double prediction, Label label,
                     const LrpOptions& options) {
  const Reservoir& res = *model.reservoir;
  const int steps = seq.length();
  const int n = res.size();
  const int d = res.input_dim();
  if (trace.states.rows() != steps || trace.states.cols() != n ||
      trace.pre_activations.rows() != steps || trace.pre_activations.cols() != n) {
    throw ShapeError("state trace does not match the input sequence");
  }
  if (seq.width() != d) throw ShapeError("sequence width differs from reservoir input");
  if (!trace.states.allFinite()) throw NumericalError("non-finite reservoir states");

  const SignRule class_rule = sign_rule_for(label);
  const double a = res.alpha;
  EsnRelevance out;
  out.prediction = prediction;
  out.start = std::abs(prediction);
  if (predict_class(prediction) != label) {
    out.warnings.push_back("prediction has the wrong sign for the requested class");
  }
  out.step_relevance = Eigen::MatrixXd::Zero(steps, d);
  out.residual = Eigen::VectorXd::Zero(steps);

  // Readout: plain class rule over w_k x_k(T).
  Eigen::VectorXd held = Eigen::VectorXd::Zero(n);
  {
    double den = 0.0;
    for (int k = 0; k < n; ++k) {
      held[k] = keep(class_rule, model.readout.weights[k] * trace.states(steps - 1, k));
      den += held[k];
    }
    if (den > 0.0) {
      held *= out.start / den;
    } else {
      held.setZero();
      out.sunk += out.start;
    }
  }

  const double inv_start = out.start > 0.0 ? 1.0 / out.start : 0.0;
  Eigen::VectorXd prev(n);
  std::vector<double> zi(static_cast<std::size_t>(d));
  for (int t = steps - 1; t >= 1; --t) {
    out.residual[t] = held.sum() * inv_start;
    prev.setZero();
    const auto u = seq.steps.row(t);
    const auto x_prev = trace.states.row(t - 1);
    for (int k = 0; k < n; ++k) {
      const double rk = held[k];
      if (rk == 0.0) continue;
      const SignRule rule = unit_rule(options.hidden, class_rule, trace.pre_activations(t, k));
      double in_sum = 0.0;
      for (int j = 0; j < d; ++j) {
        zi[static_cast<std::size_t>(j)] = keep(rule, res.w_in(k, j) * u[j]);
        in_sum += zi[static_cast<std::size_t>(j)];
      }
      double rec_sum = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(res.w_res, k); it; ++it) {
        rec_sum += keep(rule, it.value() * x_prev[it.col()]);
      }

      // Shares per unit of raw input/recurrent contribution, and the carry.
      double carry_share = 0.0;
      double scale = 0.0;
      if (options.esn_split == EsnSplit::kLeakWeighted) {
        carry_share = (1.0 - a) * rk;
        const double den = in_sum + rec_sum;
        if (den > 0.0) {
          scale = a * rk / den;
        } else {
          out.sunk += a * rk;
        }
      } else {
        const double zc = keep(rule, (1.0 - a) * x_prev[k]);
        const double den = zc + a * (in_sum + rec_sum);
        if (den > 0.0) {
          carry_share = rk * zc / den;
          scale = a * rk / den;
        } else {
          out.sunk += rk;
        }
      }
      prev[k] += carry_share;
      if (scale == 0.0) continue;
      for (int j = 0; j < d; ++j) out.step_relevance(t, j) += scale * zi[static_cast<std::size_t>(j)];
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(res.w_res, k); it; ++it) {
        prev[it.col()] += scale * keep(rule, it.value() * x_prev[it.col()]);
      }
    }
    held.swap(prev);
  }

  // First step: x(1) depends on u(1) only.
  out.residual[0] = held.sum() * inv_start;
  const auto u0 = seq.steps.row(0);
  for (int k = 0; k < n; ++k) {
    const double rk = held[k];
    if (rk == 0.0) continue;
    const SignRule rule = unit_rule(options.hidden, class_rule, trace.pre_activations(0, k));
    double den = 0.0;
    for (int j = 0; j < d; ++j) {
      zi[static_cast<std::size_t>(j)] = keep(rule, res.w_in(k, j) * u0[j]);
      den += zi[static_cast<std::size_t>(j)];
    }
    if (!(den > 0.0)) {
      out.sunk += rk;
      continue;
    }
    for (int j = 0; j < d; ++j) out.step_relevance(0, j) += rk * zi[static_cast<std::size_t>(j)] / den;
  }
  return out;
}

EsnRelevance lrp_esn(const EsnModel& model, const InputSequence& seq, Label label,
                     const LrpOptions& options) {
  const EsnForwardResult fw = esn_forward(model, seq);
  return lrp_esn(model, seq, fw.trace, fw.prediction, label, options);
}

RelevanceMap lrp_esn_map(const EsnModel& model, const GridSample& sample,
                         const FeedingPlan& plan, const LrpOptions& options) {
  const InputSequence seq = make_sequence(sample, plan);
  const EsnRelevance r = lrp_esn(model, seq, options.label.value_or(sample.label), options);
  RelevanceMap map = reassemble_relevance(r.step_relevance, seq.layout, *sample.mask);
  map.audit.total_in = r.start;
  map.audit.sunk = r.sunk;
  map.warnings = r.warnings;
  return map;
}

}  // namespace lrplab
