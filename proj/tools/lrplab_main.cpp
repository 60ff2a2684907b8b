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

// Command line front end: gen, train, eval, lrp, sweep, leakrate, export.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lrplab/checkpoint.hpp"
#include "lrplab/csv_io.hpp"
#include "lrplab/error.hpp"
#include "lrplab/experiment.hpp"

namespace fs = std::filesystem;
using namespace lrplab;

namespace {

// Process exit codes; one per pipeline stage.
int exit_code_for(const std::string& stage) {
  static const std::map<std::string, int> codes = {
      {"config", 2}, {"data", 3},    {"model", 4},  {"train", 5},
      {"evaluate", 6}, {"lrp", 7}, {"metrics", 8}, {"export", 9}};
  const auto it = codes.find(stage);
  return it == codes.end() ? 1 : it->second;
}

constexpr int kReproductionMismatch = 10;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "key = value config file");
  cmd->add_option("-s,--set", opts.overrides, "override a config key (key=value)")
      ->allow_extra_args(false);
  cmd->add_option("-o,--output", opts.output, "output directory (sets output_dir)");
}

KeyValueConfig resolve_config(const CommonOptions& opts) {
  KeyValueConfig cfg;
  if (!opts.config_path.empty()) {
    try {
      cfg = KeyValueConfig::load(opts.config_path);
    } catch (const LoadError& e) {
      throw ConfigError("--config", e.what());
    }
  }
  for (const std::string& o : opts.overrides) cfg.apply_override(o);
  if (!opts.output.empty()) cfg.set("output_dir", opts.output);
  return cfg;
}

void print_metrics(const Metrics& m) {
  std::printf("mse_train = %s\nmse_val = %s\naccuracy_train = %s\naccuracy_val = %s\n",
              csv::format(m.mse_train).c_str(), csv::format(m.mse_val).c_str(),
              csv::format(m.accuracy_train).c_str(), csv::format(m.accuracy_val).c_str());
}

void print_manifest(const RunManifest& m) {
  std::printf("parameters = %lld\n", static_cast<long long>(m.parameter_count));
  print_metrics(m.metrics);
  if (m.ratios) {
    std::printf("both_over_total = %s\nleft_over_both = %s\n",
                csv::format(m.ratios->both_over_total).c_str(),
                csv::format(m.ratios->left_over_both).c_str());
  }
  if (m.gateway) std::printf("gateway = %s\n", csv::format(*m.gateway).c_str());
  if (m.stripe_horizontal) {
    std::printf("stripe_horizontal = %s\n", csv::format(*m.stripe_horizontal).c_str());
  }
  if (m.stripe_vertical) std::printf("stripe_vertical = %s\n", csv::format(*m.stripe_vertical).c_str());
  if (m.residual_first_step) {
    std::printf("residual_first_step = %s\n", csv::format(*m.residual_first_step).c_str());
  }
  if (m.map_samples > 0) {
    std::printf("audit_residual = %s\n", csv::format(m.audit.residual()).c_str());
  }
  for (const std::string& w : m.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int cmd_gen(const CommonOptions& opts) {
  const ExperimentSpec spec = ExperimentSpec::from_config(resolve_config(opts));
  if (spec.output_dir.empty()) throw ConfigError("output_dir", "gen needs an output directory");
  const DatasetPair data = load_data(spec);
  try {
    const fs::path dir = spec.output_dir;
    fs::create_directories(dir);
    write_grid_csv(data.train, dir / "train_values.csv", dir / "mask.csv", dir / "train_targets.csv");
    write_grid_csv(data.validation, dir / "validation_values.csv", dir / "mask.csv",
                   dir / "validation_targets.csv");
    const Mask& mask = *data.train.mask();
    for (Label label : {Label::kClass1, Label::kClass2}) {
      if (data.train.count(label) == 0) continue;
      csv::write_field(dir / ("composite_class" + std::to_string(static_cast<int>(label)) + ".csv"),
                       composite_mean(data.train, label), &mask);
    }
    spec.to_config().save(dir / "config.txt");
  } catch (const std::exception& e) {
    throw StageError("export", e.what());
  }
  std::printf("train_samples = %zu\nvalidation_samples = %zu\nvalid_cells = %d\n",
              data.train.size(), data.validation.size(), data.train.valid_count());
  return 0;
}

int cmd_run(const CommonOptions& opts, bool relevance) {
  const ExperimentSpec spec = ExperimentSpec::from_config(resolve_config(opts));
  RunOptions run;
  run.compute_relevance = relevance;
  const ExperimentResult r = run_experiment(spec, run);
  print_manifest(r.manifest);
  return 0;
}

int cmd_eval(const CommonOptions& opts, const std::string& checkpoint) {
  const ExperimentSpec spec = ExperimentSpec::from_config(resolve_config(opts));
  const Model model = [&] {
    try {
      return load_checkpoint(checkpoint);
    } catch (const std::exception& e) {
      throw StageError("model", e.what());
    }
  }();
  const DatasetPair data = load_data(spec);
  print_metrics(make_metrics(evaluate_model(spec, model, data.train),
                             evaluate_model(spec, model, data.validation)));
  return 0;
}

int cmd_sweep(const CommonOptions& opts, std::string key, std::vector<std::string> values) {
  KeyValueConfig cfg = resolve_config(opts);
  if (key.empty()) key = cfg.get_string("sweep.key", "");
  if (values.empty()) values = cfg.get_strings("sweep.values", {});
  cfg.erase("sweep.key");
  cfg.erase("sweep.values");
  if (key.empty()) throw ConfigError("sweep.key", "name the key to sweep");
  const std::vector<ExperimentResult> results = run_sweep(cfg, key, values);
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::printf("[%s=%s]\n", key.c_str(), values[i].c_str());
    print_manifest(results[i].manifest);
  }
  return 0;
}

int cmd_leakrate(const CommonOptions& opts, std::vector<double> alphas, bool empirical) {
  KeyValueConfig cfg = resolve_config(opts);
  if (alphas.empty()) alphas = cfg.get_doubles("leakrate.alphas", {0.001, 0.005, 0.01, 0.05, 0.1, 0.2});
  empirical = cfg.get_bool("leakrate.empirical", empirical);
  cfg.erase("leakrate.alphas");
  cfg.erase("leakrate.empirical");
  const std::vector<LeakRateRow> rows = leak_rate_analysis(cfg, alphas, empirical);
  std::printf("alpha,analytic_exp_alpha_T,analytic_exp_alpha_T_minus_1,empirical_first_step,accuracy_val\n");
  for (const LeakRateRow& r : rows) {
    std::printf("%s,%s,%s,%s,%s\n", csv::format(r.alpha).c_str(),
                csv::format(r.analytic.full_length).c_str(), csv::format(r.analytic.minus_one).c_str(),
                r.empirical ? csv::format(*r.empirical).c_str() : "",
                r.accuracy_val ? csv::format(*r.accuracy_val).c_str() : "");
  }
  return 0;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b)); }

// Re-runs an experiment from its manifest and compares every metric.
int cmd_export(const std::string& manifest_path, const std::string& output) {
  const RunManifest old = read_manifest(manifest_path);
  KeyValueConfig cfg = old.config;
  cfg.set("output_dir", output);
  const ExperimentSpec spec = ExperimentSpec::from_config(cfg);
  RunOptions run;
  run.compute_relevance = old.map_samples > 0;
  const ExperimentResult r = run_experiment(spec, run);
  const RunManifest& m = r.manifest;
  std::vector<std::string> mismatches;
  auto check = [&](const char* name, double a, double b) {
    if (!close(a, b)) mismatches.push_back(name);
  };
  check("mse_train", m.metrics.mse_train, old.metrics.mse_train);
  check("mse_val", m.metrics.mse_val, old.metrics.mse_val);
  check("accuracy_train", m.metrics.accuracy_train, old.metrics.accuracy_train);
  check("accuracy_val", m.metrics.accuracy_val, old.metrics.accuracy_val);
  check("parameter_count", static_cast<double>(m.parameter_count),
        static_cast<double>(old.parameter_count));
  if (m.ratios && old.ratios) {
    check("both_over_total", m.ratios->both_over_total, old.ratios->both_over_total);
    check("left_over_both", m.ratios->left_over_both, old.ratios->left_over_both);
  }
  auto check_opt = [&](const char* name, const std::optional<double>& a,
                       const std::optional<double>& b) {
    if (a.has_value() != b.has_value() || (a && !close(*a, *b))) mismatches.push_back(name);
  };
  check_opt("gateway", m.gateway, old.gateway);
  check_opt("stripe_horizontal", m.stripe_horizontal, old.stripe_horizontal);
  check_opt("stripe_vertical", m.stripe_vertical, old.stripe_vertical);
  check_opt("residual_first_step", m.residual_first_step, old.residual_first_step);
  print_manifest(m);
  for (const std::string& name : mismatches) {
    std::fprintf(stderr, "mismatch: %s differs from %s\n", name.c_str(), manifest_path.c_str());
  }
  return mismatches.empty() ? 0 : kReproductionMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lrplab: relevance maps for MLP, CNN and echo state network classifiers"};
  app.set_version_flag("--version", std::string(LRPLAB_VERSION_STRING));
  app.require_subcommand(1);

  CommonOptions common;
  std::string checkpoint;
  std::string sweep_key;
  std::vector<std::string> sweep_values;
  std::vector<double> alphas;
  bool empirical = false;
  std::string manifest;
  std::string export_dir;

  CLI::App* gen = app.add_subcommand("gen", "generate a dataset and write it as CSV");
  add_common(gen, common);
  CLI::App* train = app.add_subcommand("train", "train and evaluate a model");
  add_common(train, common);
  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved checkpoint");
  add_common(eval, common);
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  CLI::App* lrp = app.add_subcommand("lrp", "train, evaluate and compute the mean relevance map");
  add_common(lrp, common);
  CLI::App* sweep = app.add_subcommand("sweep", "run one experiment per value of a key");
  add_common(sweep, common);
  sweep->add_option("--key", sweep_key, "config key to vary (or sweep.key)");
  sweep->add_option("--values", sweep_values, "values, comma separated (or sweep.values)")
      ->delimiter(',');
  CLI::App* leak = app.add_subcommand("leakrate", "residual relevance against leak rate");
  add_common(leak, common);
  leak->add_option("--alphas", alphas, "leak rates, comma separated")->delimiter(',');
  leak->add_flag("--empirical", empirical, "train an ESN per leak rate and measure R(1)");
  CLI::App* exp = app.add_subcommand("export", "re-run a manifest and check its metrics");
  exp->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
  exp->add_option("-o,--output", export_dir, "directory for the regenerated artifacts")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code_for("config");
  }

  try {
    if (gen->parsed()) return cmd_gen(common);
    if (train->parsed()) return cmd_run(common, false);
    if (eval->parsed()) return cmd_eval(common, checkpoint);
    if (lrp->parsed()) return cmd_run(common, true);
    if (sweep->parsed()) return cmd_sweep(common, sweep_key, sweep_values);
    if (leak->parsed()) return cmd_leakrate(common, alphas, empirical);
    if (exp->parsed()) return cmd_export(manifest, export_dir);
  } catch (const StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.stage());
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for("config");
  } catch (const LoadError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for("data");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
