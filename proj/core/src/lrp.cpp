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

#include "lrplab/lrp.hpp"

#include <cmath>
#include <string>

#include "lrplab/csv_io.hpp"
#include "lrplab/error.hpp"
#include "lrplab/training.hpp"

namespace lrplab {

std::string_view to_string(HiddenRule rule) noexcept {
  return rule == HiddenRule::kUnitSign ? "unit_sign" : "class";
}

HiddenRule parse_hidden_rule(std::string_view name) {
  if (name == "unit_sign") return HiddenRule::kUnitSign;
  if (name == "class") return HiddenRule::kClassRule;
  throw ConfigError("lrp.hidden_rule", "expected unit_sign or class, got '" +
                                           std::string(name) + "'");
}

std::string_view to_string(EsnSplit split) noexcept {
  return split == EsnSplit::kLeakWeighted ? "leak" : "value";
}

EsnSplit parse_esn_split(std::string_view name) {
  if (name == "leak") return EsnSplit::kLeakWeighted;
  if (name == "value") return EsnSplit::kValueWeighted;
  throw ConfigError("lrp.esn_split", "expected leak or value, got '" +
                                         std::string(name) + "'");
}

std::vector<SignRule> unit_sign_rules(const Eigen::VectorXd& pre_activation) {
  std::vector<SignRule> rules(static_cast<std::size_t>(pre_activation.size()));
  for (Eigen::Index j = 0; j < pre_activation.size(); ++j) {
    rules[static_cast<std::size_t>(j)] =
        pre_activation[j] >= 0.0 ? SignRule::kPositive : SignRule::kNegative;
  }
  return rules;
}

namespace {

inline double keep(SignRule rule, double z) noexcept {
  return rule == SignRule::kPositive ? (z > 0.0 ? z : 0.0) : (z < 0.0 ? -z : 0.0);
}

void check_upstream(const Eigen::VectorXd& activations, const Eigen::VectorXd& upstream) {
  if (!activations.allFinite()) throw NumericalError("non-finite activations");
  if (!upstream.allFinite()) throw NumericalError("non-finite upstream relevance");
  if ((upstream.array() < 0.0).any()) throw NumericalError("negative upstream relevance");
}

}  // namespace

LayerRelevance lrp_dense(const Eigen::VectorXd& activations,
                         const Eigen::MatrixXd& weights,
                         const Eigen::VectorXd& upstream,
                         std::span<const SignRule> rules) {
  if (weights.cols() != activations.size() || weights.rows() != upstream.size() ||
      static_cast<Eigen::Index>(rules.size()) != upstream.size()) {
    throw ShapeError("lrp_dense: activations, weights, upstream and rules do not chain");
  }
  check_upstream(activations, upstream);
  LayerRelevance out{Eigen::VectorXd::Zero(activations.size()), 0.0};
  Eigen::VectorXd z(activations.size());
  for (Eigen::Index j = 0; j < weights.rows(); ++j) {
    if (upstream[j] == 0.0) continue;
    const SignRule rule = rules[static_cast<std::size_t>(j)];
    double den = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z[i] = keep(rule, activations[i] * weights(j, i));
      den += z[i];
    }
    if (den > 0.0) {
      out.relevance += (upstream[j] / den) * z;
    } else {
      out.sunk += upstream[j];
    }
  }
  return out;
}

LayerRelevance lrp_dense(const Eigen::VectorXd& activations,
                         const Eigen::MatrixXd& weights,
                         const Eigen::VectorXd& upstream, SignRule rule) {
  const std::vector<SignRule> rules(static_cast<std::size_t>(upstream.size()), rule);
  return lrp_dense(activations, weights, upstream, rules);
}

LayerRelevance lrp_conv(const Eigen::VectorXd& activations, const Shape3& in_shape,
                        const ConvStage& stage, const Eigen::VectorXd& upstream,
                        std::span<const SignRule> rules) {
  if (activations.size() != in_shape.size() || in_shape.channels != stage.in_channels) {
    throw ShapeError("lrp_conv: activations do not match the stage input shape");
  }
  const Shape3 out_shape = stage.output_shape(in_shape);
  if (upstream.size() != out_shape.size() ||
      static_cast<Eigen::Index>(rules.size()) != upstream.size()) {
    throw ShapeError("lrp_conv: upstream relevance does not match the stage output");
  }
  check_upstream(activations, upstream);
  const int k = stage.kernel;
  LayerRelevance out{Eigen::VectorXd::Zero(activations.size()), 0.0};
  std::vector<double> z(static_cast<std::size_t>(in_shape.channels * k * k));
  std::vector<Eigen::Index> idx(z.size());
  for (int o = 0; o < out_shape.channels; ++o) {
    for (int y = 0; y < out_shape.rows; ++y) {
      for (int x = 0; x < out_shape.cols; ++x) {
        const Eigen::Index u = (static_cast<Eigen::Index>(o) * out_shape.rows + y) * out_shape.cols + x;
        if (upstream[u] == 0.0) continue;
        const SignRule rule = rules[static_cast<std::size_t>(u)];
        double den = 0.0;
        std::size_t n = 0;
        for (int c = 0; c < in_shape.channels; ++c) {
          for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j, ++n) {
              idx[n] = (static_cast<Eigen::Index>(c) * in_shape.rows + y * stage.stride + i) *
                           in_shape.cols + x * stage.stride + j;
              z[n] = keep(rule, activations[idx[n]] * stage.weight(o, c, i, j));
              den += z[n];
            }
          }
        }
        if (den > 0.0) {
          const double scale = upstream[u] / den;
          for (std::size_t m = 0; m < n; ++m) out.relevance[idx[m]] += scale * z[m];
        } else {
          out.sunk += upstream[u];
        }
      }
    }
  }
  return out;
}

LayerRelevance lrp_conv(const Eigen::VectorXd& activations, const Shape3& in_shape,
                        const ConvStage& stage, const Eigen::VectorXd& upstream,
                        SignRule rule) {
  const std::vector<SignRule> rules(static_cast<std::size_t>(upstream.size()), rule);
  return lrp_conv(activations, in_shape, stage, upstream, rules);
}

namespace {

// Rules for the units receiving relevance at one level.
std::vector<SignRule> level_rules(const LayerRecord& record, bool is_output,
                                  SignRule class_rule, HiddenRule hidden) {
  if (is_output || hidden == HiddenRule::kClassRule) {
    return std::vector<SignRule>(static_cast<std::size_t>(record.output.size()), class_rule);
  }
  return unit_sign_rules(record.pre_activation);
}

struct Start {
  double value = 0.0;
  std::vector<std::string> warnings;
};

// The start value is |Y| for both classes so that every share stays
// non-negative; a prediction on the wrong side of zero is only reported.
Start start_value(double prediction, Label label) {
  Start s{std::abs(prediction), {}};
  if (predict_class(prediction) != label) {
    s.warnings.push_back("prediction " + csv::format(prediction) +
                         " has the wrong sign for class " +
                         std::to_string(static_cast<int>(label)));
  }
  return s;
}

void begin_levels(FeedforwardRelevance& r, const ForwardResult& fw, Label label) {
  r.prediction = fw.prediction;
  Start s = start_value(fw.prediction, label);
  r.start = s.value;
  r.warnings = std::move(s.warnings);
  r.layer_totals.push_back(r.start);
  r.layer_sunk_above.push_back(0.0);
}

void push_level(FeedforwardRelevance& r, const LayerRelevance& lr) {
  r.layer_sunk_above.push_back(r.layer_sunk_above.back() + lr.sunk);
  r.layer_totals.push_back(lr.relevance.sum());
}

Eigen::VectorXd dense_chain(const std::vector<DenseLayer>& layers, const LayerTrace& trace,
                            std::size_t first, Eigen::VectorXd relevance, SignRule rule,
                            HiddenRule hidden, FeedforwardRelevance& out) {
  for (std::size_t li = layers.size(); li-- > 0;) {
    const LayerRecord& rec = trace.layers[first + li];
    const bool is_output = first + li + 1 == trace.layers.size();
    const std::vector<SignRule> rules = level_rules(rec, is_output, rule, hidden);
    LayerRelevance lr = lrp_dense(rec.input, layers[li].weights, relevance, rules);
    push_level(out, lr);
    relevance = std::move(lr.relevance);
  }
  return relevance;
}

}  // namespace

FeedforwardRelevance lrp_feedforward(const MlpModel& model, const Eigen::VectorXd& input,
                                     Label label, const LrpOptions& options) {
  const ForwardResult fw = mlp_forward(model, input);
  FeedforwardRelevance out;
  begin_levels(out, fw, label);
  out.input = dense_chain(model.layers, fw.trace, 0, Eigen::VectorXd::Constant(1, out.start),
                          sign_rule_for(label), options.hidden, out);
  return out;
}

FeedforwardRelevance lrp_feedforward(const ConvModel& model, const Eigen::VectorXd& input,
                                     Label label, const LrpOptions& options) {
  const ForwardResult fw = conv_forward(model, input);
  FeedforwardRelevance out;
  begin_levels(out, fw, label);
  const SignRule rule = sign_rule_for(label);
  Eigen::VectorXd relevance =
      dense_chain(model.head, fw.trace, model.stages.size(),
                  Eigen::VectorXd::Constant(1, out.start), rule, options.hidden, out);

  std::vector<Shape3> shapes{model.input};
  for (const ConvStage& s : model.stages) shapes.push_back(s.output_shape(shapes.back()));
  for (std::size_t si = model.stages.size(); si-- > 0;) {
    const LayerRecord& rec = fw.trace.layers[si];
    const bool is_output = model.head.empty() && si + 1 == model.stages.size();
    const std::vector<SignRule> rules = level_rules(rec, is_output, rule, options.hidden);
    LayerRelevance lr = lrp_conv(rec.input, shapes[si], model.stages[si], relevance, rules);
    push_level(out, lr);
    relevance = std::move(lr.relevance);
  }
  out.input = std::move(relevance);
  return out;
}

namespace {

Label resolve_label(const GridSample& sample, const LrpOptions& options) {
  return options.label.value_or(sample.label);
}

void finish_map(RelevanceMap& map, const FeedforwardRelevance& r) {
  map.audit.total_in = r.start;
  map.audit.sunk = r.layer_sunk_above.back();
  map.layer_totals = r.layer_totals;
  map.layer_sunk_above = r.layer_sunk_above;
  map.warnings = r.warnings;
}

}  // namespace

RelevanceMap lrp_feedforward(const MlpModel& model, const GridSample& sample,
                             const LrpOptions& options) {
  FlatVector flat = flatten_valid(sample);
  const FeedforwardRelevance r =
      lrp_feedforward(model, flat.values, resolve_label(sample, options), options);
  RelevanceMap map = reassemble_flat(r.input, flat.index_map, *sample.mask);
  finish_map(map, r);
  return map;
}

RelevanceMap lrp_feedforward(const ConvModel& model, const GridSample& sample,
                             const LrpOptions& options) {
  const Eigen::VectorXd input = model_input(model, sample);
  const FeedforwardRelevance r =
      lrp_feedforward(model, input, resolve_label(sample, options), options);
  // Only the first input channel carries grid values.
  Field padded(model.input.rows, model.input.cols, 0.0);
  std::copy(r.input.data(), r.input.data() + padded.size(), padded.data());
  RelevanceMap map = reassemble_padded(padded, *sample.mask);
  finish_map(map, r);
  return map;
}

namespace {

class MapAccumulator {
 public:
  explicit MapAccumulator(const GridDataset& dataset, Label label) : label_(label) {
    if (!dataset.mask()) throw ShapeError("dataset has no mask");
    sum_.scores = Field(dataset.rows(), dataset.cols(), 0.0);
  }

  bool wants(const GridSample& s) const { return s.label == label_; }

  void add(const RelevanceMap& m) {
    ++count_;
    sum_.strategy = m.strategy;
    for (std::size_t i = 0; i < m.scores.size(); ++i) sum_.scores.data()[i] += m.scores.data()[i];
    RelevanceAudit& a = sum_.audit;
    a.total_in += m.audit.total_in;
    a.attributed += m.audit.attributed;
    a.dummy_absorbed += m.audit.dummy_absorbed;
    a.pad_discarded += m.audit.pad_discarded;
    a.invalid_discarded += m.audit.invalid_discarded;
    a.sunk += m.audit.sunk;
    if (sum_.layer_totals.empty()) {
      sum_.layer_totals.assign(m.layer_totals.size(), 0.0);
      sum_.layer_sunk_above.assign(m.layer_sunk_above.size(), 0.0);
    }
    for (std::size_t i = 0; i < m.layer_totals.size(); ++i) {
      sum_.layer_totals[i] += m.layer_totals[i];
      sum_.layer_sunk_above[i] += m.layer_sunk_above[i];
    }
    for (const std::string& w : m.warnings) sum_.warnings.push_back(w);
  }

  MeanRelevance finish() {
    if (count_ == 0) {
      throw Error("no samples of class " + std::to_string(static_cast<int>(label_)) +
                  " in the dataset");
    }
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t i = 0; i < sum_.scores.size(); ++i) sum_.scores.data()[i] *= inv;
    RelevanceAudit& a = sum_.audit;
    a.total_in *= inv;
    a.attributed *= inv;
    a.dummy_absorbed *= inv;
    a.pad_discarded *= inv;
    a.invalid_discarded *= inv;
    a.sunk *= inv;
    for (double& v : sum_.layer_totals) v *= inv;
    for (double& v : sum_.layer_sunk_above) v *= inv;
    return MeanRelevance{std::move(sum_), count_, {}};
  }

 private:
  Label label_;
  RelevanceMap sum_;
  std::size_t count_ = 0;
};

template <typename M>
MeanRelevance mean_feedforward(const M& model, const GridDataset& dataset, Label label,
                               const LrpOptions& options) {
  MapAccumulator acc(dataset, label);
  LrpOptions per_sample = options;
  per_sample.label = label;
  for (const GridSample& s : dataset.samples()) {
    if (acc.wants(s)) acc.add(lrp_feedforward(model, s, per_sample));
  }
  return acc.finish();
}

}  // namespace

MeanRelevance mean_relevance_map(const MlpModel& model, const GridDataset& dataset,
                                 Label label, const LrpOptions& options) {
  return mean_feedforward(model, dataset, label, options);
}

MeanRelevance mean_relevance_map(const ConvModel& model, const GridDataset& dataset,
                                 Label label, const LrpOptions& options) {
  return mean_feedforward(model, dataset, label, options);
}

MeanRelevance mean_relevance_map(const EsnModel& model, const GridDataset& dataset,
                                 Label label, const FeedingPlan& plan,
                                 const LrpOptions& options) {
  MapAccumulator acc(dataset, label);
  Eigen::VectorXd residual;
  for (const GridSample& s : dataset.samples()) {
    if (!acc.wants(s)) continue;
    const InputSequence seq = make_sequence(s, plan);
    const EsnRelevance r = lrp_esn(model, seq, label, options);
    RelevanceMap map = reassemble_relevance(r.step_relevance, seq.layout, *s.mask);
    map.audit.total_in = r.start;
    map.audit.sunk = r.sunk;
    map.warnings = r.warnings;
    acc.add(map);
    if (residual.size() == 0) residual = Eigen::VectorXd::Zero(r.residual.size());
    residual += r.residual;
  }
  MeanRelevance out = acc.finish();
  out.mean_residual = residual / static_cast<double>(out.samples);
  return out;
}

void write_relevance_map(const std::filesystem::path& csv_path,
                         const std::filesystem::path& pgm_path,
                         const RelevanceMap& map, const Mask& mask) {
  csv::write_field(csv_path, map.scores, &mask);
  csv::write_pgm(pgm_path, map.scores, mask);
}

}  // namespace lrplab
