// Copyright 2026 The anonkit Authors
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

#include <exception>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "anonkit/pipeline.h"

namespace {

struct Flags {
  anonkit::PipelineConfig cfg;
  std::size_t k = 2;
  std::optional<std::size_t> l;
  std::optional<double> t;
  std::optional<double> delta;
  std::string models = "knn,rf,ab,gb";
  std::vector<std::size_t> k_values;
};

std::vector<anonkit::ml::Family> parse_models(const std::string& list) {
  std::vector<anonkit::ml::Family> out;
  std::string item;
  for (std::size_t i = 0; i <= list.size(); ++i) {
    if (i == list.size() || list[i] == ',') {
      auto name = anonkit::trim(item);
      if (!name.empty()) out.push_back(anonkit::ml::parse_family(name));
      item.clear();
    } else {
      item += list[i];
    }
  }
  if (out.empty()) throw anonkit::Error("--models: no model family given");
  return out;
}

void add_table_flags(CLI::App* app, Flags& f) {
  app->add_option("--data", f.cfg.data_path, "Input table (CSV with header)")
      ->required()
      ->check(CLI::ExistingFile);
  app->add_option("--schema", f.cfg.schema_path, "Schema JSON")
      ->required()
      ->check(CLI::ExistingFile);
  app->add_option("--out", f.cfg.out_dir, "Output directory")->capture_default_str();
}

void add_requirement_flags(CLI::App* app, Flags& f) {
  app->add_option("--k", f.k, "k-anonymity level")->capture_default_str();
  app->add_option("--l", f.l, "Distinct l-diversity level");
  app->add_option("--t", f.t, "t-closeness bound");
  app->add_option("--delta", f.delta, "delta-disclosure bound");
}

void add_search_flags(CLI::App* app, Flags& f) {
  app->add_option("--hierarchies", f.cfg.hierarchy_dir, "Directory of <attribute>.csv hierarchies")
      ->check(CLI::ExistingDirectory);
  app->add_option("--suppression-limit", f.cfg.suppression_limit,
                  "Largest suppressed fraction of records")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
}

void add_model_flags(CLI::App* app, Flags& f) {
  app->add_option("--split", f.cfg.split, "Training fraction")->capture_default_str();
  app->add_option("--seed", f.cfg.seed, "Seed for split, folds and forests")
      ->capture_default_str();
  app->add_option("--models", f.models, "Comma-separated families: knn,tree,rf,ab,gb")
      ->capture_default_str();
  app->add_flag("--reduced-grid", f.cfg.reduced_grid, "Use small hyper-parameter grids");
  app->add_option("--folds", f.cfg.folds, "Cross-validation folds")->capture_default_str();
}

void add_release_flags(CLI::App* app, Flags& f) {
  app->add_option("--suppressed", f.cfg.suppressed, "Records suppressed from the release")
      ->capture_default_str();
  app->add_option("--original-count", f.cfg.original_count,
                  "Records before anonymization (default: rows + suppressed)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anonkit: anonymize tabular data and measure the utility cost"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--jobs", f.cfg.jobs, "Worker threads")->capture_default_str()->check(
      CLI::PositiveNumber);

  auto* anonymize = app.add_subcommand("anonymize", "Find the cheapest generalization");
  add_table_flags(anonymize, f);
  add_requirement_flags(anonymize, f);
  add_search_flags(anonymize, f);

  auto* audit = app.add_subcommand("audit", "Measure k, l, t and delta of a released table");
  add_table_flags(audit, f);
  audit->add_option("--suppressed", f.cfg.suppressed, "Records suppressed from the release")
      ->capture_default_str();

  auto* metrics = app.add_subcommand("metrics", "Average class size and classification metric");
  add_table_flags(metrics, f);
  metrics->add_option("--k", f.k, "k used for the average class size")->capture_default_str();
  add_release_flags(metrics, f);

  auto* evaluate = app.add_subcommand("evaluate", "Train and score classifiers on a table");
  add_table_flags(evaluate, f);
  add_model_flags(evaluate, f);
  add_release_flags(evaluate, f);

  auto* sweep_k = app.add_subcommand("sweep-k", "Anonymize and evaluate for several k");
  add_table_flags(sweep_k, f);
  add_search_flags(sweep_k, f);
  add_model_flags(sweep_k, f);
  sweep_k->add_option("--k-values", f.k_values, "k list (default 2 5 10 25 50 75 100)")
      ->delimiter(',');

  auto* sweep_t = app.add_subcommand("sweep-techniques",
                                     "Compare raw, k, k+l, k+t and k+delta releases");
  add_table_flags(sweep_t, f);
  add_search_flags(sweep_t, f);
  add_model_flags(sweep_t, f);
  sweep_t->add_option("--k", f.k, "k for every anonymized configuration");
  sweep_t->add_option("--l", f.l, "l for the l-diversity configuration (default 2)");
  sweep_t->add_option("--t", f.t, "t for the t-closeness configuration (default 0.7)");
  sweep_t->add_option("--delta", f.delta, "delta for the delta-disclosure configuration (default 1.5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; every usage error maps to the generic code.
    return app.exit(e) == 0 ? anonkit::kExitOk : anonkit::kExitError;
  }

  try {
    auto& cfg = f.cfg;
    if (sweep_t->parsed() && sweep_t->count("--k") == 0) f.k = 5;
    cfg.requirement.k = f.k;
    cfg.requirement.l = f.l;
    cfg.requirement.t = f.t;
    cfg.requirement.delta = f.delta;
    cfg.models = parse_models(f.models);
    if (!f.k_values.empty()) cfg.k_values = f.k_values;
    anonkit::validate_requirement(cfg.requirement);
    if (!(cfg.split > 0.0 && cfg.split < 1.0)) throw anonkit::Error("--split must lie in (0, 1)");

    int status = anonkit::kExitOk;
    if (anonymize->parsed()) status = anonkit::cmd_anonymize(cfg);
    if (audit->parsed()) status = anonkit::cmd_audit(cfg);
    if (metrics->parsed()) status = anonkit::cmd_metrics(cfg);
    if (evaluate->parsed()) status = anonkit::cmd_evaluate(cfg);
    if (sweep_k->parsed()) status = anonkit::cmd_sweep_k(cfg);
    if (sweep_t->parsed()) status = anonkit::cmd_sweep_techniques(cfg);
    if (status == anonkit::kExitUnsatisfiable) {
      std::cerr << "anonkit: requirement unsatisfiable, see the report in " << cfg.out_dir << "\n";
    }
    return status;
  } catch (const std::exception& e) {
    std::cerr << "anonkit: " << e.what() << "\n";
    return anonkit::kExitError;
  }
}
