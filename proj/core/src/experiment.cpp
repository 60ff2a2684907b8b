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

#include "lrplab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

#include "lrplab/csv_io.hpp"
#include "lrplab/error.hpp"

#ifndef LRPLAB_VERSION
#define LRPLAB_VERSION "unknown"
#endif

namespace lrplab {

using nlohmann::json;

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::kMlp: return "mlp";
    case ModelKind::kCnn: return "cnn";
    case ModelKind::kEsn: return "esn";
  }
  return "mlp";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "mlp") return ModelKind::kMlp;
  if (name == "cnn") return ModelKind::kCnn;
  if (name == "esn") return ModelKind::kEsn;
  throw ConfigError("model", "expected mlp, cnn or esn, got '" + std::string(name) + "'");
}

namespace {

std::string fmt(double v) { return csv::format(v); }

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string region_text(const RegionSpec& r) {
  return join({r.row_begin, r.row_end, r.col_begin, r.col_end});
}

RegionSpec region_value(const KeyValueConfig& cfg, const std::string& key, RegionSpec fallback) {
  const std::vector<int> v = cfg.get_ints(key, {});
  if (!cfg.has(key)) return fallback;
  if (v.size() != 4) throw ConfigError(key, "expected row_begin,row_end,col_begin,col_end");
  return {v[0], v[1], v[2], v[3]};
}

Label label_value(const KeyValueConfig& cfg, const std::string& key, Label fallback) {
  const int v = cfg.get_int(key, static_cast<int>(fallback));
  if (v != 1 && v != 2) throw ConfigError(key, "class must be 1 or 2");
  return static_cast<Label>(v);
}

Strategy default_strategy(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMlp: return Strategy::kFlat;
    case ModelKind::kCnn: return Strategy::kPadded;
    case ModelKind::kEsn: return Strategy::kColumnwise;
  }
  return Strategy::kFlat;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

ExperimentSpec ExperimentSpec::from_config(const KeyValueConfig& cfg) {
  ExperimentSpec s;
  s.model = parse_model_kind(cfg.get_string("model", "mlp"));
  s.strategy = cfg.has("strategy") ? parse_strategy(*cfg.get("strategy"))
                                   : default_strategy(s.model);
  s.output_dir = cfg.get_string("output_dir", "");

  DataSpec& d = s.data;
  d.source = cfg.get_string("data.source", d.source);
  d.values_path = cfg.get_string("data.values", "");
  d.mask_path = cfg.get_string("data.mask", "");
  d.targets_path = cfg.get_string("data.targets", "");
  d.train_fraction = cfg.get_double("data.train_fraction", d.train_fraction);
  d.load.neutral_threshold = cfg.get_double("data.neutral_threshold", d.load.neutral_threshold);
  SyntheticConfig& syn = d.synthetic;
  syn.height = cfg.get_int("synthetic.height", syn.height);
  syn.width = cfg.get_int("synthetic.width", syn.width);
  syn.left_square = region_value(cfg, "synthetic.left_square", syn.left_square);
  syn.right_square = region_value(cfg, "synthetic.right_square", syn.right_square);
  syn.square_magnitude = cfg.get_double("synthetic.square_magnitude", syn.square_magnitude);
  syn.noise_low = cfg.get_double("synthetic.noise_low", syn.noise_low);
  syn.noise_high = cfg.get_double("synthetic.noise_high", syn.noise_high);
  syn.barrier_col_begin = cfg.get_int("synthetic.barrier_col_begin", syn.barrier_col_begin);
  syn.barrier_col_end = cfg.get_int("synthetic.barrier_col_end", syn.barrier_col_end);
  syn.gateway = region_value(cfg, "synthetic.gateway", syn.gateway);
  syn.n_train_per_class = cfg.get_int("synthetic.n_train_per_class", syn.n_train_per_class);
  syn.n_val_per_class = cfg.get_int("synthetic.n_val_per_class", syn.n_val_per_class);
  syn.seed = cfg.get_u64("synthetic.seed", syn.seed);

  TrainConfig& t = s.train;
  t.learning_rate = cfg.get_double("train.learning_rate", t.learning_rate);
  t.epochs = cfg.get_int("train.epochs", t.epochs);
  t.batch_size = cfg.get_int("train.batch_size", t.batch_size);
  t.l1_coeff = cfg.get_double("train.l1", t.l1_coeff);
  t.seed = cfg.get_u64("train.seed", t.seed);
  const std::string opt = cfg.get_string("train.optimizer", "adam");
  if (opt == "adam") {
    t.optimizer = Optimizer::kAdam;
  } else if (opt == "sgd") {
    t.optimizer = Optimizer::kSgd;
  } else {
    throw ConfigError("train.optimizer", "expected adam or sgd, got '" + opt + "'");
  }

  s.model_seed = cfg.get_u64("model.seed", s.model_seed);
  s.mlp_hidden = cfg.get_ints("mlp.hidden", s.mlp_hidden);
  s.mlp_init_scale = cfg.get_double("mlp.init_scale", s.mlp_init_scale);
  s.cnn.kernel = cfg.get_int("cnn.kernel", s.cnn.kernel);
  s.cnn.stride = cfg.get_int("cnn.stride", s.cnn.stride);
  s.cnn.channels = cfg.get_int("cnn.channels", s.cnn.channels);
  s.cnn.hidden = cfg.get_ints("cnn.hidden", s.cnn.hidden);

  EsnConfig& e = s.esn;
  e.reservoir_size = cfg.get_int("esn.reservoir_size", e.reservoir_size);
  e.alpha = cfg.get_double("esn.alpha", e.alpha);
  e.density = cfg.get_double("esn.density", e.density);
  e.spectral_radius = cfg.get_double("esn.spectral_radius", e.spectral_radius);
  e.input_scale = cfg.get_double("esn.input_scale", e.input_scale);
  e.reservoir_scale = cfg.get_double("esn.reservoir_scale", e.reservoir_scale);
  e.seed = cfg.get_u64("esn.seed", e.seed);
  s.ridge = cfg.get_double("esn.ridge", s.ridge);

  s.piece_size = cfg.get_int("feed.piece_size", s.piece_size);
  s.permutation_seed = cfg.get_u64("feed.permutation_seed", s.permutation_seed);
  s.dummy_first = cfg.get_bool("feed.dummy_first", s.dummy_first);

  s.lrp.hidden = parse_hidden_rule(cfg.get_string("lrp.hidden_rule", to_string(s.lrp.hidden)));
  s.lrp.esn_split = parse_esn_split(cfg.get_string("lrp.esn_split", to_string(s.lrp.esn_split)));
  s.map_label = label_value(cfg, "lrp.label", s.map_label);
  const std::string split = cfg.get_string("lrp.split", "validation");
  if (split == "validation") {
    s.map_split = Split::kValidation;
  } else if (split == "train") {
    s.map_split = Split::kTrain;
  } else {
    throw ConfigError("lrp.split", "expected train or validation, got '" + split + "'");
  }

  s.left_square = region_value(cfg, "region.left", syn.left_square);
  s.right_square = region_value(cfg, "region.right", syn.right_square);
  s.gateway = region_value(cfg, "region.gateway", syn.gateway);

  const std::vector<std::string> unused = cfg.unused_keys();
  if (!unused.empty()) throw ConfigError(unused.front(), "unknown key");
  s.validate();
  return s;
}

KeyValueConfig ExperimentSpec::to_config() const {
  KeyValueConfig c;
  c.set("model", std::string(to_string(model)));
  c.set("strategy", std::string(to_string(strategy)));
  c.set("output_dir", output_dir.string());
  c.set("data.source", data.source);
  c.set("data.values", data.values_path.string());
  c.set("data.mask", data.mask_path.string());
  c.set("data.targets", data.targets_path.string());
  c.set("data.train_fraction", fmt(data.train_fraction));
  c.set("data.neutral_threshold", fmt(data.load.neutral_threshold));
  const SyntheticConfig& syn = data.synthetic;
  c.set("synthetic.height", std::to_string(syn.height));
  c.set("synthetic.width", std::to_string(syn.width));
  c.set("synthetic.left_square", region_text(syn.left_square));
  c.set("synthetic.right_square", region_text(syn.right_square));
  c.set("synthetic.square_magnitude", fmt(syn.square_magnitude));
  c.set("synthetic.noise_low", fmt(syn.noise_low));
  c.set("synthetic.noise_high", fmt(syn.noise_high));
  c.set("synthetic.barrier_col_begin", std::to_string(syn.barrier_col_begin));
  c.set("synthetic.barrier_col_end", std::to_string(syn.barrier_col_end));
  c.set("synthetic.gateway", region_text(syn.gateway));
  c.set("synthetic.n_train_per_class", std::to_string(syn.n_train_per_class));
  c.set("synthetic.n_val_per_class", std::to_string(syn.n_val_per_class));
  c.set("synthetic.seed", std::to_string(syn.seed));
  c.set("train.learning_rate", fmt(train.learning_rate));
  c.set("train.epochs", std::to_string(train.epochs));
  c.set("train.batch_size", std::to_string(train.batch_size));
  c.set("train.l1", fmt(train.l1_coeff));
  c.set("train.seed", std::to_string(train.seed));
  c.set("train.optimizer", train.optimizer == Optimizer::kAdam ? "adam" : "sgd");
  c.set("model.seed", std::to_string(model_seed));
  c.set("mlp.hidden", join(mlp_hidden));
  c.set("mlp.init_scale", fmt(mlp_init_scale));
  c.set("cnn.kernel", std::to_string(cnn.kernel));
  c.set("cnn.stride", std::to_string(cnn.stride));
  c.set("cnn.channels", std::to_string(cnn.channels));
  c.set("cnn.hidden", join(cnn.hidden));
  c.set("esn.reservoir_size", std::to_string(esn.reservoir_size));
  c.set("esn.alpha", fmt(esn.alpha));
  c.set("esn.density", fmt(esn.density));
  c.set("esn.spectral_radius", fmt(esn.spectral_radius));
  c.set("esn.input_scale", fmt(esn.input_scale));
  c.set("esn.reservoir_scale", fmt(esn.reservoir_scale));
  c.set("esn.seed", std::to_string(esn.seed));
  c.set("esn.ridge", fmt(ridge));
  c.set("feed.piece_size", std::to_string(piece_size));
  c.set("feed.permutation_seed", std::to_string(permutation_seed));
  c.set("feed.dummy_first", dummy_first ? "true" : "false");
  c.set("lrp.hidden_rule", std::string(to_string(lrp.hidden)));
  c.set("lrp.esn_split", std::string(to_string(lrp.esn_split)));
  c.set("lrp.label", std::to_string(static_cast<int>(map_label)));
  c.set("lrp.split", map_split == Split::kValidation ? "validation" : "train");
  c.set("region.left", region_text(left_square));
  c.set("region.right", region_text(right_square));
  c.set("region.gateway", region_text(gateway));
  return c;
}

void ExperimentSpec::validate() const {
  const bool sequence = is_sequence_strategy(strategy);
  if (model == ModelKind::kEsn && !sequence) {
    throw ConfigError("strategy", "ESN models need column, row or piecewise feeding");
  }
  if (model == ModelKind::kMlp && strategy != Strategy::kFlat) {
    throw ConfigError("strategy", "MLP models use flat feeding");
  }
  if (model == ModelKind::kCnn && strategy != Strategy::kPadded) {
    throw ConfigError("strategy", "CNN models use padded feeding");
  }
  if (data.source == "synthetic") {
    data.synthetic.validate();
  } else if (data.source == "csv") {
    if (data.values_path.empty() || data.mask_path.empty() || data.targets_path.empty()) {
      throw ConfigError("data.values", "csv source needs data.values, data.mask and data.targets");
    }
    if (!(data.train_fraction > 0.0 && data.train_fraction <= 1.0)) {
      throw ConfigError("data.train_fraction", "must lie in (0, 1]");
    }
  } else {
    throw ConfigError("data.source", "expected synthetic or csv");
  }
  if (model == ModelKind::kEsn) {
    if (!(ridge >= 0.0)) throw ConfigError("esn.ridge", "must be >= 0");
    if (strategy == Strategy::kPiecewise && piece_size < 1) {
      throw ConfigError("feed.piece_size", "must be >= 1");
    }
  } else {
    train.validate();
  }
  if (!(mlp_init_scale >= 0.0)) throw ConfigError("mlp.init_scale", "must be >= 0");
  if (data.source == "synthetic") {
    const int h = data.synthetic.height;
    const int w = data.synthetic.width;
    const std::pair<const char*, const RegionSpec*> regions[] = {
        {"region.left", &left_square}, {"region.right", &right_square},
        {"region.gateway", &gateway}};
    for (const auto& [name, r] : regions) {
      if (r->empty() || !r->fits(h, w)) throw ConfigError(name, "region does not lie on the grid");
    }
  }
}

DatasetPair load_data(const ExperimentSpec& spec) {
  return stage("data", [&] {
    if (spec.data.source == "synthetic") return generate_synthetic(spec.data.synthetic);
    GridDataset all = load_grid_csv(spec.data.values_path, spec.data.mask_path,
                                    spec.data.targets_path, spec.data.load);
    ChronologicalSplit split = split_chronological(all, spec.data.train_fraction);
    return DatasetPair{std::move(split.train), std::move(split.validation)};
  });
}

FeedingPlan feeding_plan(const ExperimentSpec& spec, const Mask& mask) {
  FeedingPlan plan = FeedingPlan::make(spec.strategy, mask, spec.piece_size, spec.permutation_seed);
  plan.dummy_first = spec.dummy_first;
  return plan;
}

Model build_model(const ExperimentSpec& spec, const Mask& mask) {
  return stage("model", [&]() -> Model {
    switch (spec.model) {
      case ModelKind::kMlp:
        return make_mlp(count_valid(mask), spec.mlp_hidden, spec.model_seed, spec.mlp_init_scale);
      case ModelKind::kCnn:
        return make_cnn(padded_extent(mask.rows(), spec.cnn.kernel, spec.cnn.stride),
                        padded_extent(mask.cols(), spec.cnn.kernel, spec.cnn.stride), spec.cnn,
                        spec.model_seed);
      case ModelKind::kEsn: {
        EsnConfig cfg = spec.esn;
        const FeedingPlan plan = feeding_plan(spec, mask);
        GridSample probe{Field(mask.rows(), mask.cols(), 0.0),
                         std::make_shared<const Mask>(mask), 1.0, Label::kClass1};
        cfg.input_dim = make_sequence(probe, plan).width();
        return make_esn(cfg);
      }
    }
    throw ConfigError("model", "unknown model kind");
  });
}

TrainedModel train_model(const ExperimentSpec& spec, const DatasetPair& data) {
  Model initial = build_model(spec, *data.train.mask());
  return stage("train", [&]() -> TrainedModel {
    if (auto* mlp = std::get_if<MlpModel>(&initial)) {
      auto r = train_feedforward(std::move(*mlp), data.train, spec.train);
      return {std::move(r.model), std::move(r.history)};
    }
    if (auto* cnn = std::get_if<ConvModel>(&initial)) {
      auto r = train_feedforward(std::move(*cnn), data.train, spec.train);
      return {std::move(r.model), std::move(r.history)};
    }
    const FeedingPlan plan = feeding_plan(spec, *data.train.mask());
    return {train_esn_readout(std::get<EsnModel>(initial), data.train, plan, spec.ridge), {}};
  });
}

EvalResult evaluate_model(const ExperimentSpec& spec, const Model& model,
                          const GridDataset& dataset) {
  return stage("evaluate", [&] {
    return std::visit(
        [&](const auto& m) -> EvalResult {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, EsnModel>) {
            return evaluate(m, dataset, feeding_plan(spec, *dataset.mask()));
          } else {
            return evaluate(m, dataset);
          }
        },
        model);
  });
}

MeanRelevance explain_model(const ExperimentSpec& spec, const Model& model,
                            const DatasetPair& data) {
  return stage("lrp", [&] {
    const GridDataset& ds = spec.map_split == Split::kValidation ? data.validation : data.train;
    return std::visit(
        [&](const auto& m) -> MeanRelevance {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, EsnModel>) {
            return mean_relevance_map(m, ds, spec.map_label, feeding_plan(spec, *ds.mask()),
                                      spec.lrp);
          } else {
            return mean_relevance_map(m, ds, spec.map_label, spec.lrp);
          }
        },
        model);
  });
}

namespace {

std::int64_t parameter_count(const Model& model) {
  return std::visit([](const auto& m) { return count_parameters(m); }, model);
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

void measure(const ExperimentSpec& spec, const Mask& mask, const MeanRelevance& rel,
             RunManifest& m) {
  const Field& scores = rel.map.scores;
  auto guarded = [&](auto&& f) -> std::optional<double> {
    try {
      return f();
    } catch (const NumericalError& e) {
      m.warnings.push_back(e.what());
      return std::nullopt;
    }
  };
  try {
    m.ratios = region_ratios(scores, mask, spec.left_square, spec.right_square);
  } catch (const NumericalError& e) {
    m.warnings.push_back(e.what());
  }
  m.gateway = guarded([&] { return gateway_statistic(scores, mask, spec.gateway); });
  m.stripe_horizontal = guarded([&] { return stripe_statistic(scores, mask, StripeAxis::kHorizontal); });
  m.stripe_vertical = guarded([&] { return stripe_statistic(scores, mask, StripeAxis::kVertical); });
  if (rel.mean_residual.size() > 0) m.residual_first_step = rel.mean_residual[0];
  m.audit = rel.map.audit;
  m.map_samples = rel.samples;
  for (const std::string& w : rel.map.warnings) m.warnings.push_back(w);
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json j;
  j["tool_version"] = m.tool_version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  json cfg = json::object();
  for (const auto& [k, v] : m.config.entries()) cfg[k] = v;
  j["config"] = cfg;
  j["parameter_count"] = m.parameter_count;
  j["metrics"] = {{"mse_train", m.metrics.mse_train},
                  {"mse_val", m.metrics.mse_val},
                  {"accuracy_train", m.metrics.accuracy_train},
                  {"accuracy_val", m.metrics.accuracy_val}};
  json rel = json::object();
  if (m.ratios) {
    rel["both_over_total"] = m.ratios->both_over_total;
    rel["left_over_both"] = m.ratios->left_over_both;
  } else {
    rel["both_over_total"] = nullptr;
    rel["left_over_both"] = nullptr;
  }
  put_optional(rel, "gateway", m.gateway);
  put_optional(rel, "stripe_horizontal", m.stripe_horizontal);
  put_optional(rel, "stripe_vertical", m.stripe_vertical);
  put_optional(rel, "residual_first_step", m.residual_first_step);
  rel["samples"] = m.map_samples;
  j["relevance"] = rel;
  j["audit"] = {{"total_in", m.audit.total_in},
                {"attributed", m.audit.attributed},
                {"dummy_absorbed", m.audit.dummy_absorbed},
                {"pad_discarded", m.audit.pad_discarded},
                {"invalid_discarded", m.audit.invalid_discarded},
                {"sunk", m.audit.sunk},
                {"residual", m.audit.residual()}};
  j["warnings"] = m.warnings;
  j["artifacts"] = m.artifacts;
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(LoadErrorKind::kMissingFile, "cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    for (const auto& [k, v] : j.at("config").items()) m.config.set(k, v.get<std::string>());
    m.parameter_count = j.at("parameter_count").get<std::int64_t>();
    const json& met = j.at("metrics");
    m.metrics = {met.at("mse_train").get<double>(), met.at("mse_val").get<double>(),
                 met.at("accuracy_train").get<double>(), met.at("accuracy_val").get<double>()};
    const json& rel = j.at("relevance");
    const auto both = get_optional<double>(rel, "both_over_total");
    const auto left = get_optional<double>(rel, "left_over_both");
    if (both && left) m.ratios = RegionRatios{*both, *left};
    m.gateway = get_optional<double>(rel, "gateway");
    m.stripe_horizontal = get_optional<double>(rel, "stripe_horizontal");
    m.stripe_vertical = get_optional<double>(rel, "stripe_vertical");
    m.residual_first_step = get_optional<double>(rel, "residual_first_step");
    m.map_samples = rel.at("samples").get<std::size_t>();
    const json& a = j.at("audit");
    m.audit.total_in = a.at("total_in").get<double>();
    m.audit.attributed = a.at("attributed").get<double>();
    m.audit.dummy_absorbed = a.at("dummy_absorbed").get<double>();
    m.audit.pad_discarded = a.at("pad_discarded").get<double>();
    m.audit.invalid_discarded = a.at("invalid_discarded").get<double>();
    m.audit.sunk = a.at("sunk").get<double>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw LoadError(LoadErrorKind::kParse, "malformed manifest " + path.string() + ": " + e.what());
  }
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  ExperimentResult result;
  RunManifest& m = result.manifest;
  m.config = spec.to_config();
  m.tool_version = LRPLAB_VERSION;
  m.started = timestamp();

  const DatasetPair data = load_data(spec);
  TrainedModel trained = train_model(spec, data);
  result.model = std::move(trained.model);
  result.history = std::move(trained.history);
  m.parameter_count = parameter_count(result.model);
  m.metrics = make_metrics(evaluate_model(spec, result.model, data.train),
                           evaluate_model(spec, result.model, data.validation));

  const Mask& mask = *data.train.mask();
  if (options.compute_relevance) {
    result.relevance = explain_model(spec, result.model, data);
    stage("metrics", [&] { measure(spec, mask, *result.relevance, m); });
  }
  m.finished = timestamp();

  if (options.write_artifacts && !spec.output_dir.empty()) {
    stage("export", [&] {
      const std::filesystem::path dir = spec.output_dir;
      std::filesystem::create_directories(dir);
      save_checkpoint(dir / "model.ckpt", result.model);
      m.artifacts["checkpoint"] = "model.ckpt";
      m.config.save(dir / "config.txt");
      m.artifacts["config"] = "config.txt";
      csv::write_mask(dir / "mask.csv", mask);
      m.artifacts["mask"] = "mask.csv";
      if (!result.history.empty()) {
        write_loss_history(dir / "loss_history.csv", result.history);
        m.artifacts["loss_history"] = "loss_history.csv";
      }
      if (result.relevance) {
        write_relevance_map(dir / "relevance.csv", dir / "relevance.pgm", result.relevance->map, mask);
        m.artifacts["relevance_csv"] = "relevance.csv";
        m.artifacts["relevance_pgm"] = "relevance.pgm";
        if (result.relevance->mean_residual.size() > 0) {
          const ResidualCurve curve =
              empirical_residual(spec.esn.alpha, result.relevance->mean_residual);
          write_residual_curves(dir / "residual.csv", std::span(&curve, 1));
          m.artifacts["residual"] = "residual.csv";
        }
      }
      for (Label label : {Label::kClass1, Label::kClass2}) {
        if (data.train.count(label) == 0) continue;
        const std::string name = "composite_class" + std::to_string(static_cast<int>(label)) + ".csv";
        csv::write_field(dir / name, composite_mean(data.train, label), &mask);
        m.artifacts["composite_class" + std::to_string(static_cast<int>(label))] = name;
      }
      write_manifest(dir / "manifest.json", m);
    });
  }
  return result;
}

std::vector<ExperimentResult> run_sweep(const KeyValueConfig& base, const std::string& key,
                                        std::span<const std::string> values,
                                        const RunOptions& options) {
  if (values.empty()) throw ConfigError("sweep.values", "no values to sweep");
  const std::filesystem::path root = base.get_string("output_dir", "");
  std::vector<ExperimentResult> results;
  std::vector<std::vector<double>> rows;
  for (const std::string& value : values) {
    KeyValueConfig cfg = base;
    cfg.set(key, value);
    if (!root.empty()) cfg.set("output_dir", (root / (key + "=" + value)).string());
    const ExperimentSpec spec = ExperimentSpec::from_config(cfg);
    results.push_back(run_experiment(spec, options));
    const RunManifest& m = results.back().manifest;
    const double nan = std::nan("");
    rows.push_back({static_cast<double>(rows.size()), m.metrics.mse_train, m.metrics.mse_val,
                    m.metrics.accuracy_train, m.metrics.accuracy_val,
                    m.ratios ? m.ratios->both_over_total : nan,
                    m.ratios ? m.ratios->left_over_both : nan, m.gateway.value_or(nan),
                    m.stripe_horizontal.value_or(nan), m.stripe_vertical.value_or(nan),
                    static_cast<double>(m.parameter_count)});
  }
  if (options.write_artifacts && !root.empty()) {
    std::filesystem::create_directories(root);
    csv::write_table(root / "sweep_summary.csv",
                     {"point", "mse_train", "mse_val", "accuracy_train", "accuracy_val",
                      "both_over_total", "left_over_both", "gateway", "stripe_horizontal",
                      "stripe_vertical", "parameters"},
                     rows);
    std::ofstream points(root / "sweep_points.txt");
    for (std::size_t i = 0; i < values.size(); ++i) points << i << ' ' << key << '=' << values[i] << '\n';
  }
  return results;
}

std::vector<LeakRateRow> leak_rate_analysis(const KeyValueConfig& base,
                                            std::span<const double> alphas, bool empirical) {
  if (alphas.empty()) throw ConfigError("leakrate.alphas", "no leak rates given");
  KeyValueConfig cfg = base;
  cfg.set("model", "esn");
  if (!cfg.has("strategy")) cfg.set("strategy", "column");
  const ExperimentSpec base_spec = ExperimentSpec::from_config(cfg);
  // Data steps only; the dummy step adds one more to the sequence.
  const int data_steps = [&] {
    const Mask mask = base_spec.data.source == "synthetic"
                          ? make_synthetic_mask(base_spec.data.synthetic)
                          : *load_data(base_spec).train.mask();
    GridSample probe{Field(mask.rows(), mask.cols(), 0.0), std::make_shared<const Mask>(mask),
                     1.0, Label::kClass1};
    return make_sequence(probe, feeding_plan(base_spec, mask)).layout.data_steps();
  }();

  std::vector<LeakRateRow> rows;
  std::vector<ResidualCurve> curves;
  const std::optional<DatasetPair> data =
      empirical ? std::optional<DatasetPair>(load_data(base_spec)) : std::nullopt;
  for (double alpha : alphas) {
    LeakRateRow row{alpha, first_step_residual(alpha, data_steps), std::nullopt, std::nullopt};
    curves.push_back(analytic_residual(alpha, data_steps));
    if (empirical) {
      ExperimentSpec spec = base_spec;
      spec.esn.alpha = alpha;
      TrainedModel trained = train_model(spec, *data);
      row.accuracy_val = evaluate_model(spec, trained.model, data->validation).accuracy;
      const MeanRelevance rel = explain_model(spec, trained.model, *data);
      row.empirical = rel.mean_residual[0];
      curves.push_back(empirical_residual(alpha, rel.mean_residual));
    }
    rows.push_back(row);
  }
  if (!base_spec.output_dir.empty()) {
    stage("export", [&] {
      const std::filesystem::path dir = base_spec.output_dir;
      std::filesystem::create_directories(dir);
      std::vector<ResidualCurve> analytic, rate, measured;
      for (const ResidualCurve& c : curves) {
        (c.kind == CurveKind::kAnalytic ? analytic : measured).push_back(c);
      }
      for (double alpha : alphas) rate.push_back(residual_rate(alpha, data_steps));
      write_residual_curves(dir / "residual_analytic.csv", analytic);
      write_residual_curves(dir / "residual_rate.csv", rate);
      if (!measured.empty()) write_residual_curves(dir / "residual_empirical.csv", measured);
      std::vector<std::vector<double>> table;
      const double nan = std::nan("");
      for (const LeakRateRow& r : rows) {
        table.push_back({r.alpha, r.analytic.full_length, r.analytic.minus_one,
                         r.empirical.value_or(nan), r.accuracy_val.value_or(nan)});
      }
      csv::write_table(dir / "leakrate_summary.csv",
                       {"alpha", "analytic_exp_alpha_T", "analytic_exp_alpha_T_minus_1",
                        "empirical_first_step", "accuracy_val"},
                       table);
    });
  }
  return rows;
}

}  // namespace lrplab
