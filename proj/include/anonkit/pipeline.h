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

// End-to-end commands behind the command-line tool. Each command writes its
// artifacts into an output directory and returns a process exit status:
// 0 on success, kExitUnsatisfiable when a privacy requirement cannot be met.
// Input errors surface as anonkit::Error.
//
// Reports are JSON with fixed key order; nothing time- or host-dependent is
// written, so identical configurations give byte-identical files.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "anonkit/anonymizer.h"
#include "anonkit/common.h"
#include "anonkit/data.h"
#include "anonkit/hierarchy.h"
#include "anonkit/metrics.h"
#include "anonkit/ml/encoder.h"
#include "anonkit/ml/grid_search.h"
#include "anonkit/ml/model.h"
#include "anonkit/partition.h"
#include "anonkit/privacy.h"
#include "json.hpp"

namespace anonkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnsatisfiable = 2;

using Json = nlohmann::ordered_json;

struct PipelineConfig {
  std::string data_path;
  std::string schema_path;
  std::string hierarchy_dir;
  std::string out_dir = "out";
  PrivacyRequirement requirement;
  double suppression_limit = 1.0;
  double split = 0.75;
  std::uint64_t seed = 0;
  std::vector<ml::Family> models = {ml::Family::kKnn, ml::Family::kRandomForest,
                                    ml::Family::kAdaBoost, ml::Family::kGradientBoosting};
  bool reduced_grid = false;
  std::size_t folds = 5;
  int jobs = 1;
  // Sweeps.
  std::vector<std::size_t> k_values = {2, 5, 10, 25, 50, 75, 100};
  // evaluate / metrics / audit on an already released table.
  std::size_t suppressed = 0;
  std::optional<std::size_t> original_count;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

inline void write_json_file(const std::filesystem::path& path, const Json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

inline Json node_to_json(const GeneralizationVector& g) {
  Json arr = Json::array();
  for (int l : g.levels) arr.push_back(l);
  return arr;
}

// ---------------------------------------------------------------------------
// Evaluation

struct ModelEvaluation {
  ml::Family family;
  ml::Params params;
  double cv_accuracy = 0.0;
  EvalReport report;
};

struct TableEvaluation {
  std::size_t records = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::vector<ModelEvaluation> models;
};

inline ml::ParamGrid grid_for(ml::Family f, bool reduced) {
  return reduced ? ml::reduced_grid(f) : ml::default_grid(f);
}

// Stratified split, then per family: grid search on the training part,
// refit with the winner, score the test part.
inline TableEvaluation evaluate_table(const Dataset& table, const PipelineConfig& cfg) {
  if (table.rows.empty()) throw Error("evaluate: table is empty");
  const auto split = split_stratified(table, cfg.split, cfg.seed);
  const auto encoder = ml::fit_encoder(split.train);
  const auto train = ml::encode(encoder, split.train);
  const auto test = ml::encode(encoder, split.test);
  {
    std::size_t pos = 0;
    for (int y : train.labels) pos += y;
    if (pos == 0 || pos == train.rows) {
      throw Error("evaluate: table has a single label value ('" + *table.schema.positive_label +
                  "' " + (pos == 0 ? "absent" : "only") + ")");
    }
  }
  TableEvaluation out;
  out.records = table.rows.size();
  out.train_rows = train.rows;
  out.test_rows = test.rows;
  for (auto family : cfg.models) {
    const auto search =
        ml::grid_search_cv(family, grid_for(family, cfg.reduced_grid), train, cfg.folds,
                           cfg.seed, cfg.jobs);
    const auto model = ml::fit_model(search.best, train, cfg.jobs);
    const auto scores = model.predict_scores(test);
    std::vector<int> predicted(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) predicted[i] = scores[i] >= 0.5 ? 1 : 0;
    ModelEvaluation m{family, search.best.params, search.mean_accuracy[search.best_index], {}};
    m.report = roc_auc(test.labels, scores);
    m.report.accuracy = accuracy(test.labels, predicted);
    const std::vector<double> hard(predicted.begin(), predicted.end());
    m.report.label_auc = roc_auc(test.labels, hard).auc;
    out.models.push_back(std::move(m));
  }
  return out;
}

inline std::string roc_file_name(ml::Family f) {
  return "roc_" + std::string(ml::family_name(f)) + ".csv";
}

inline Json evaluation_to_json(const TableEvaluation& e, const PipelineConfig& cfg) {
  Json j;
  j["records"] = e.records;
  j["train"] = e.train_rows;
  j["test"] = e.test_rows;
  j["split"] = cfg.split;
  j["seed"] = cfg.seed;
  j["grid"] = cfg.reduced_grid ? "reduced" : "full";
  Json models = Json::object();
  for (const auto& m : e.models) {
    Json mj;
    Json params = Json::object();
    for (const auto& [k, v] : m.params) {
      if (v == static_cast<double>(static_cast<long long>(v))) {
        params[k] = static_cast<long long>(v);
      } else {
        params[k] = v;
      }
    }
    mj["params"] = params;
    mj["cv_accuracy"] = m.cv_accuracy;
    mj["accuracy"] = m.report.accuracy;
    mj["auc"] = m.report.auc;
    mj["label_auc"] = m.report.label_auc;
    mj["positives"] = m.report.positives;
    mj["negatives"] = m.report.negatives;
    mj["roc_file"] = roc_file_name(m.family);
    models[std::string(ml::family_name(m.family))] = mj;
  }
  j["models"] = models;
  return j;
}

inline void write_roc_files(const std::filesystem::path& dir, const TableEvaluation& e) {
  for (const auto& m : e.models) {
    std::ostringstream s;
    write_roc_points(s, m.report.roc_points);
    write_text_file(dir / roc_file_name(m.family), s.str());
  }
}

// ---------------------------------------------------------------------------
// Inputs

struct Inputs {
  Dataset data;  // identifiers removed
  HierarchySet hierarchies;
};

inline Inputs load_inputs(const PipelineConfig& cfg) {
  const auto schema = load_schema_file(cfg.schema_path);
  Inputs in;
  in.data = drop_identifiers(load_dataset_file(cfg.data_path, schema));
  if (!cfg.hierarchy_dir.empty()) {
    in.hierarchies = load_hierarchies(cfg.hierarchy_dir, in.data.schema);
  } else {
    for (auto i : in.data.schema.quasi_identifier_indices()) {
      const auto& name = in.data.schema.attributes[i].name;
      in.hierarchies.emplace(name, Hierarchy::identity(name));
    }
  }
  return in;
}

// Released tables: generalized values allowed, identifiers dropped.
inline Dataset load_released_table(const PipelineConfig& cfg) {
  const auto schema = load_schema_file(cfg.schema_path);
  return drop_identifiers(load_dataset_file(cfg.data_path, schema, {.generalized = true}));
}

// ---------------------------------------------------------------------------
// Anonymization

struct AnonymizeOutcome {
  std::optional<AnonymizationResult> result;
  Json summary;
};

inline Json metrics_json(const Dataset& released, std::size_t k, std::size_t suppressed,
                         std::size_t original_count) {
  Json j;
  const auto p = partition_classes(released);
  j["records"] = released.rows.size();
  j["classes"] = p.classes.size();
  j["k"] = k;
  j["suppressed"] = suppressed;
  j["original_count"] = original_count;
  if (p.classes.empty()) {
    j["avg_class_size"] = nullptr;
  } else {
    j["avg_class_size"] = avg_class_size_metric(released.rows.size(), k, p.classes.size());
  }
  j["classification_metric"] = classification_metric(original_count, suppressed, p);
  return j;
}

// Runs the search and builds the summary report; never throws on an
// unsatisfiable requirement (the summary records it instead).
inline AnonymizeOutcome run_anonymize(const Inputs& in, const PipelineConfig& cfg) {
  AnonymizeOutcome out;
  const SearchConfig search{cfg.suppression_limit, cfg.requirement};
  Json s;
  s["requirement"] = requirement_to_json(cfg.requirement);
  s["suppression_limit"] = cfg.suppression_limit;
  s["input_records"] = in.data.rows.size();
  try {
    auto result = anonymize(in.data, in.hierarchies, search, {cfg.jobs});
    s["status"] = "ok";
    s["node"] = node_to_json(result.node);
    s["normalized_level_sum"] = result.cost.normalized_level_sum;
    s["suppressed"] = result.suppressed_count;
    s["records"] = result.output.rows.size();
    s["classes"] = result.audit.class_count;
    s["avg_class_size"] = avg_class_size_metric(result.output.rows.size(), cfg.requirement.k,
                                                result.audit.class_count);
    s["classification_metric"] = classification_metric(
        in.data.rows.size(), result.suppressed_count, partition_classes(result.output));
    s["audit"] = audit_to_json(result.audit);
    out.result = std::move(result);
  } catch (const UnsatisfiableError& e) {
    s["status"] = "unsatisfiable";
    s["message"] = e.what();
    s["best_node"] = e.best_node ? node_to_json(*e.best_node) : Json(nullptr);
    s["best_audit"] = e.best_audit ? audit_to_json(*e.best_audit) : Json(nullptr);
  }
  out.summary = std::move(s);
  return out;
}

// Writes anonymized.csv, audit.json and summary.json.
inline int cmd_anonymize(const PipelineConfig& cfg) {
  const auto in = load_inputs(cfg);
  const auto outcome = run_anonymize(in, cfg);
  const std::filesystem::path dir(cfg.out_dir);
  write_json_file(dir / "summary.json", outcome.summary);
  if (!outcome.result) return kExitUnsatisfiable;
  write_dataset_file((dir / "anonymized.csv").string(), outcome.result->output);
  write_json_file(dir / "audit.json", audit_to_json(outcome.result->audit));
  return kExitOk;
}

// Writes audit.json for a released table.
inline int cmd_audit(const PipelineConfig& cfg) {
  const auto table = load_released_table(cfg);
  write_json_file(std::filesystem::path(cfg.out_dir) / "audit.json",
                  audit_to_json(audit(table, cfg.suppressed)));
  return kExitOk;
}

// Writes metrics.json (average class size and classification metric).
inline int cmd_metrics(const PipelineConfig& cfg) {
  const auto table = load_released_table(cfg);
  const auto original = cfg.original_count.value_or(table.rows.size() + cfg.suppressed);
  write_json_file(std::filesystem::path(cfg.out_dir) / "metrics.json",
                  metrics_json(table, cfg.requirement.k, cfg.suppressed, original));
  return kExitOk;
}

// Writes evaluation.json and roc_<model>.csv files.
inline int cmd_evaluate(const PipelineConfig& cfg) {
  const auto table = load_released_table(cfg);
  const auto original = cfg.original_count.value_or(table.rows.size() + cfg.suppressed);
  const auto eval = evaluate_table(table, cfg);
  auto doc = evaluation_to_json(eval, cfg);
  doc["classification_metric"] =
      classification_metric(original, cfg.suppressed, partition_classes(table));
  const std::filesystem::path dir(cfg.out_dir);
  write_json_file(dir / "evaluation.json", doc);
  write_roc_files(dir, eval);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  std::string name;
  PrivacyRequirement requirement;
  bool raw = false;
};

// Anonymizes (unless raw), evaluates and writes everything for one
// configuration into dir. Returns the row for the consolidated report.
inline Json run_configuration(const Inputs& in, const PipelineConfig& base, const SweepRow& row,
                              const std::filesystem::path& dir) {
  auto cfg = base;
  cfg.requirement = row.requirement;
  Json j;
  j["name"] = row.name;
  j["requirement"] = row.raw ? Json(nullptr) : requirement_to_json(row.requirement);

  const Dataset* table = &in.data;
  std::size_t suppressed = 0;
  AnonymizeOutcome outcome;
  if (!row.raw) {
    outcome = run_anonymize(in, cfg);
    write_json_file(dir / "summary.json", outcome.summary);
    if (!outcome.result) {
      j["status"] = "unsatisfiable";
      j["best_audit"] = outcome.summary["best_audit"];
      return j;
    }
    write_dataset_file((dir / "anonymized.csv").string(), outcome.result->output);
    table = &outcome.result->output;
    suppressed = outcome.result->suppressed_count;
    j["node"] = node_to_json(outcome.result->node);
  }
  j["status"] = "ok";
  const auto a = audit(*table, suppressed);
  write_json_file(dir / "audit.json", audit_to_json(a));
  j["suppressed"] = suppressed;
  j["records"] = table->rows.size();
  j["classes"] = a.class_count;
  j["avg_class_size"] = avg_class_size_metric(table->rows.size(), cfg.requirement.k, a.class_count);
  j["classification_metric"] =
      classification_metric(in.data.rows.size(), suppressed, partition_classes(*table));
  j["audit"] = audit_to_json(a);

  const auto eval = evaluate_table(*table, cfg);
  auto eval_doc = evaluation_to_json(eval, cfg);
  write_json_file(dir / "evaluation.json", eval_doc);
  write_roc_files(dir, eval);
  Json models = Json::object();
  for (const auto& m : eval.models) {
    models[std::string(ml::family_name(m.family))] = {{"accuracy", m.report.accuracy},
                                                       {"auc", m.report.auc}};
  }
  j["models"] = models;
  return j;
}

inline std::string format_number(const Json& v) {
  if (v.is_null()) return "";
  return v.dump();
}

// Flat CSV view of a consolidated report: one line per configuration.
inline std::string sweep_csv(const Json& rows, const std::vector<ml::Family>& models) {
  std::string out = "name,status,suppressed,records,classes,avg_class_size,classification_metric";
  for (auto f : models) {
    const std::string n(ml::family_name(f));
    out += "," + n + "_accuracy," + n + "_auc";
  }
  out += "\n";
  for (const auto& r : rows) {
    const bool ok = r["status"] == "ok";
    out += r["name"].get<std::string>() + "," + r["status"].get<std::string>();
    for (const char* key : {"suppressed", "records", "classes", "avg_class_size",
                            "classification_metric"}) {
      out += "," + (ok ? format_number(r[key]) : std::string());
    }
    for (auto f : models) {
      const std::string n(ml::family_name(f));
      if (ok) {
        out += "," + format_number(r["models"][n]["accuracy"]) + "," +
               format_number(r["models"][n]["auc"]);
      } else {
        out += ",,";
      }
    }
    out += "\n";
  }
  return out;
}

inline int run_sweep(const PipelineConfig& cfg, const std::vector<SweepRow>& rows,
                     const std::string& report_name) {
  const auto in = load_inputs(cfg);
  const std::filesystem::path dir(cfg.out_dir);
  Json consolidated = Json::array();
  bool all_ok = true;
  for (const auto& row : rows) {
    auto r = run_configuration(in, cfg, row, dir / row.name);
    all_ok = all_ok && r["status"] == "ok";
    consolidated.push_back(std::move(r));
  }
  Json doc;
  doc["input_records"] = in.data.rows.size();
  doc["suppression_limit"] = cfg.suppression_limit;
  doc["rows"] = consolidated;
  write_json_file(dir / (report_name + ".json"), doc);
  write_text_file(dir / (report_name + ".csv"), sweep_csv(consolidated, cfg.models));
  return all_ok ? kExitOk : kExitUnsatisfiable;
}

// One configuration per k in cfg.k_values, k-anonymity only.
inline int cmd_sweep_k(const PipelineConfig& cfg) {
  std::vector<SweepRow> rows;
  for (auto k : cfg.k_values) {
    PrivacyRequirement r;
    r.k = k;
    rows.push_back({"k" + std::to_string(k), r, false});
  }
  return run_sweep(cfg, rows, "sweep_k");
}

// raw, k, k + l, k + t, k + delta with the values in cfg.requirement
// (defaults 5, 2, 0.7, 1.5).
inline int cmd_sweep_techniques(const PipelineConfig& cfg) {
  const auto k = cfg.requirement.k;
  const auto l = cfg.requirement.l.value_or(2);
  const auto t = cfg.requirement.t.value_or(0.7);
  const auto delta = cfg.requirement.delta.value_or(1.5);
  PrivacyRequirement base;
  base.k = k;
  auto with_l = base;
  with_l.l = l;
  auto with_t = base;
  with_t.t = t;
  auto with_delta = base;
  with_delta.delta = delta;
  std::vector<SweepRow> rows = {
      {"raw", PrivacyRequirement{}, true},
      {"k", base, false},
      {"k_l", with_l, false},
      {"k_t", with_t, false},
      {"k_delta", with_delta, false},
  };
  return run_sweep(cfg, rows, "sweep_techniques");
}

}  // namespace anonkit
