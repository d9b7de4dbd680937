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

#include "anonkit/pipeline.h"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>

#include "test_util.h"

namespace anonkit {
namespace {

namespace fs = std::filesystem;

const std::string kFixtures = std::string(ANONKIT_TEST_DIR) + "/fixtures";
const std::string kGolden = std::string(ANONKIT_TEST_DIR) + "/golden";

PipelineConfig toy_config(const fs::path& out) {
  PipelineConfig cfg;
  cfg.data_path = kFixtures + "/toy/data.csv";
  cfg.schema_path = kFixtures + "/toy/schema.json";
  cfg.hierarchy_dir = kFixtures + "/toy/hierarchies";
  cfg.out_dir = out.string();
  cfg.requirement.k = 3;
  cfg.suppression_limit = 0.0;
  return cfg;
}

PipelineConfig separable_config(const fs::path& out) {
  PipelineConfig cfg;
  cfg.data_path = kFixtures + "/separable/data.csv";
  cfg.schema_path = kFixtures + "/separable/schema.json";
  cfg.out_dir = out.string();
  cfg.reduced_grid = true;
  return cfg;
}

Json read_json(const fs::path& p) { return Json::parse(testing::read_file(p)); }

// Relative path -> bytes for every regular file under dir.
std::map<std::string, std::string> tree_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = testing::read_file(e.path());
  }
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ANONKIT_CLI) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// Writes a random instance (with its hierarchies) as CLI inputs.
void write_instance(const testing::RandomInstance& inst, const fs::path& dir) {
  fs::create_directories(dir / "h");
  write_dataset_file((dir / "data.csv").string(), inst.data);
  write_text_file(dir / "schema.json", schema_to_json(inst.data.schema).dump(2));
  for (const auto& [name, h] : inst.hierarchies) {
    if (h.is_identity()) continue;
    std::string text;
    for (const auto& v : h.keys()) {
      for (int l = 0; l <= h.height(); ++l) text += (l ? ";" : "") + h.generalize(v, l);
      text += "\n";
    }
    write_text_file(dir / "h" / (name + ".csv"), text);
  }
}

TEST(AnonymizeCommand, ToyMatchesGoldenFiles) {
  const auto out = testing::scratch_dir("golden_toy");
  ASSERT_EQ(cmd_anonymize(toy_config(out)), kExitOk);
  for (const char* f : {"summary.json", "audit.json", "anonymized.csv"}) {
    EXPECT_EQ(testing::read_file(out / f), testing::read_file(fs::path(kGolden) / "toy_k3" / f)) << f;
  }
}

TEST(AnonymizeCommand, KOneKeepsTableMinusIdentifiers) {
  const auto out = testing::scratch_dir("k1");
  auto cfg = toy_config(out);
  cfg.requirement.k = 1;
  ASSERT_EQ(cmd_anonymize(cfg), kExitOk);
  const auto in = load_inputs(cfg);
  EXPECT_EQ(testing::read_file(out / "anonymized.csv"),
            "q0,sa\na,s0\na,s1\na,s0\nb,s1\nb,s0\nc,s1\n");
  const auto s = read_json(out / "summary.json");
  EXPECT_EQ(s["avg_class_size"].get<double>(), 6.0 / 3.0);
  EXPECT_EQ(s["node"], Json::array({0}));
  EXPECT_EQ(in.data.schema.attributes.size(), 2u);
}

TEST(AnonymizeCommand, UnsatisfiableExitsTwoWithBestAudit) {
  const auto out = testing::scratch_dir("unsat");
  auto cfg = toy_config(out);
  cfg.requirement.l = 3;
  EXPECT_EQ(cmd_anonymize(cfg), kExitUnsatisfiable);
  const auto s = read_json(out / "summary.json");
  EXPECT_EQ(s["status"], "unsatisfiable");
  EXPECT_EQ(s["best_audit"]["l"], 2);
  EXPECT_FALSE(fs::exists(out / "anonymized.csv"));
}

TEST(AuditCommand, ReauditMatchesAndIsIdempotent) {
  const auto out = testing::scratch_dir("audit_src");
  ASSERT_EQ(cmd_anonymize(toy_config(out)), kExitOk);
  PipelineConfig cfg;
  cfg.data_path = (out / "anonymized.csv").string();
  cfg.schema_path = kFixtures + "/toy/schema.json";
  // The released table has no identifier column; give audit a matching schema.
  const auto schema_dir = testing::scratch_dir("audit_schema");
  auto schema = load_schema_file(cfg.schema_path);
  schema.attributes.erase(schema.attributes.begin());
  write_text_file(schema_dir / "schema.json", schema_to_json(schema).dump(2));
  cfg.schema_path = (schema_dir / "schema.json").string();
  const auto a1 = testing::scratch_dir("audit_1"), a2 = testing::scratch_dir("audit_2");
  cfg.out_dir = a1.string();
  ASSERT_EQ(cmd_audit(cfg), kExitOk);
  cfg.out_dir = a2.string();
  ASSERT_EQ(cmd_audit(cfg), kExitOk);
  EXPECT_EQ(testing::read_file(a1 / "audit.json"), testing::read_file(out / "audit.json"));
  EXPECT_EQ(testing::read_file(a1 / "audit.json"), testing::read_file(a2 / "audit.json"));
}

TEST(MetricsCommand, ToyRelease) {
  const auto src = testing::scratch_dir("metrics_src");
  ASSERT_EQ(cmd_anonymize(toy_config(src)), kExitOk);
  PipelineConfig cfg;
  cfg.data_path = (src / "anonymized.csv").string();
  auto schema = load_schema_file(kFixtures + "/toy/schema.json");
  schema.attributes.erase(schema.attributes.begin());
  write_text_file(src / "schema.json", schema_to_json(schema).dump(2));
  cfg.schema_path = (src / "schema.json").string();
  cfg.requirement.k = 3;
  cfg.out_dir = testing::scratch_dir("metrics_out").string();
  ASSERT_EQ(cmd_metrics(cfg), kExitOk);
  const auto m = read_json(fs::path(cfg.out_dir) / "metrics.json");
  EXPECT_EQ(m["avg_class_size"].get<double>(), 2.0);
  EXPECT_EQ(m["classification_metric"].get<double>(), 0.5);
  EXPECT_EQ(m["original_count"], 6);
}

TEST(EvaluateCommand, SeparableTableIsPerfect) {
  const auto out = testing::scratch_dir("eval_sep");
  ASSERT_EQ(cmd_evaluate(separable_config(out)), kExitOk);
  const auto e = read_json(out / "evaluation.json");
  for (const char* fam : {"knn", "rf", "ab", "gb"}) {
    EXPECT_EQ(e["models"][fam]["accuracy"].get<double>(), 1.0) << fam;
    EXPECT_EQ(e["models"][fam]["auc"].get<double>(), 1.0) << fam;
    const auto roc = testing::read_file(out / ("roc_" + std::string(fam) + ".csv"));
    EXPECT_EQ(roc.rfind("fpr,tpr\n0,0\n", 0), 0u) << fam;
  }
  EXPECT_EQ(e["train"], 60);
  EXPECT_EQ(e["test"], 20);
}

TEST(EvaluateCommand, SingleLabelTableFails) {
  const auto dir = testing::scratch_dir("single_label");
  write_text_file(dir / "data.csv", "q0,label\na,no\nb,no\nc,no\nd,no\n");
  auto cfg = separable_config(dir / "out");
  cfg.data_path = (dir / "data.csv").string();
  EXPECT_THROW(cmd_evaluate(cfg), Error);
}

TEST(SweepK, KOneRowEqualsRawEvaluation) {
  const auto out = testing::scratch_dir("sweep_k1");
  auto cfg = separable_config(out / "sweep");
  cfg.k_values = {1};
  ASSERT_EQ(cmd_sweep_k(cfg), kExitOk);
  cfg.out_dir = (out / "raw").string();
  ASSERT_EQ(cmd_evaluate(cfg), kExitOk);
  const auto sweep = read_json(out / "sweep" / "k1" / "evaluation.json");
  const auto raw = read_json(out / "raw" / "evaluation.json");
  EXPECT_EQ(sweep["models"], raw["models"]);
  const auto report = read_json(out / "sweep" / "sweep_k.json");
  ASSERT_EQ(report["rows"].size(), 1u);
  EXPECT_EQ(report["rows"][0]["suppressed"], 0);
}

TEST(SweepK, TwoRowReport) {
  const auto out = testing::scratch_dir("sweep_k12");
  auto cfg = separable_config(out);
  cfg.k_values = {1, 2};
  cfg.models = {ml::Family::kTree};
  ASSERT_EQ(cmd_sweep_k(cfg), kExitOk);
  EXPECT_EQ(testing::read_file(out / "sweep_k.csv"),
            "name,status,suppressed,records,classes,avg_class_size,classification_metric,"
            "tree_accuracy,tree_auc\n"
            "k1,ok,0,80,4,20.0,0.0,1.0,1.0\n"
            "k2,ok,0,80,4,10.0,0.0,1.0,1.0\n");
}

TEST(SweepTechniques, FiveRowsWithSatisfiedAudits) {
  const auto out = testing::scratch_dir("sweep_tech");
  const auto hdir = testing::scratch_dir("sweep_tech_h");
  write_text_file(hdir / "q0.csv", "a;*\nb;*\nc;*\nd;*\n");
  auto cfg = separable_config(out);
  cfg.hierarchy_dir = hdir.string();
  cfg.requirement.k = 5;
  cfg.models = {ml::Family::kTree, ml::Family::kGradientBoosting};
  ASSERT_EQ(cmd_sweep_techniques(cfg), kExitOk);
  const auto report = read_json(out / "sweep_techniques.json");
  ASSERT_EQ(report["rows"].size(), 5u);
  const std::vector<std::string> names = {"raw", "k", "k_l", "k_t", "k_delta"};
  const std::vector<PrivacyRequirement> reqs = {
      {.k = 1}, {.k = 5}, {.k = 5, .l = 2}, {.k = 5, .t = 0.7}, {.k = 5, .delta = 1.5}};
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& row = report["rows"][i];
    EXPECT_EQ(row["name"], names[i]);
    EXPECT_EQ(row["status"], "ok");
    // Re-audit the written table from disk.
    PipelineConfig rc;
    rc.schema_path = cfg.schema_path;
    rc.data_path = i == 0 ? cfg.data_path : (out / names[i] / "anonymized.csv").string();
    const auto a = audit(load_released_table(rc), row["suppressed"].get<std::size_t>());
    EXPECT_TRUE(audit_meets(a, reqs[i])) << names[i];
    EXPECT_EQ(audit_to_json(a), row["audit"]) << names[i];
  }
  // l = 2 forces q0 to "*": one class holding both labels.
  EXPECT_EQ(report["rows"][2]["node"], Json::array({1}));
  EXPECT_EQ(report["rows"][2]["classes"], 1);
}

// Property: every table the CLI writes re-audits to its requirement.
TEST(PipelineProperty, EmittedTablesMeetRequirement) {
  Rng rng(21);
  int satisfied = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = testing::random_instance(rng, 60, 3);
    const auto dir = testing::scratch_dir("prop_" + std::to_string(trial));
    write_instance(inst, dir);
    PipelineConfig cfg;
    cfg.data_path = (dir / "data.csv").string();
    cfg.schema_path = (dir / "schema.json").string();
    cfg.hierarchy_dir = (dir / "h").string();
    cfg.out_dir = (dir / "out").string();
    cfg.suppression_limit = static_cast<double>(uniform_below(rng, 6)) / 10.0;
    cfg.requirement.k = 1 + uniform_below(rng, 5);
    if (uniform_below(rng, 2)) cfg.requirement.l = 2;
    if (uniform_below(rng, 2)) cfg.requirement.t = 0.5;
    const int rc = cmd_anonymize(cfg);
    if (rc == kExitUnsatisfiable) continue;
    ASSERT_EQ(rc, kExitOk);
    ++satisfied;
    const auto s = read_json(dir / "out" / "summary.json");
    PipelineConfig released = cfg;
    released.data_path = (dir / "out" / "anonymized.csv").string();
    const auto a = audit(load_released_table(released), s["suppressed"].get<std::size_t>());
    EXPECT_TRUE(audit_meets(a, cfg.requirement));
    EXPECT_LE(s["suppressed"].get<std::size_t>(),
              suppression_budget(cfg.suppression_limit, inst.data.row_count()));
  }
  EXPECT_GT(satisfied, 0);
}

TEST(Determinism, SweepIsByteIdenticalAcrossRunsAndWorkers) {
  const auto root = testing::scratch_dir("determinism");
  const auto hdir = root / "h";
  fs::create_directories(hdir);
  write_text_file(hdir / "q0.csv", "a;*\nb;*\nc;*\nd;*\n");
  std::vector<std::map<std::string, std::string>> runs;
  for (int jobs : {1, 1, 4}) {
    const auto out = root / ("run" + std::to_string(runs.size()));
    auto cfg = separable_config(out);
    cfg.hierarchy_dir = hdir.string();
    cfg.requirement.k = 5;
    cfg.jobs = jobs;
    cfg.models = {ml::Family::kKnn, ml::Family::kRandomForest, ml::Family::kAdaBoost,
                  ml::Family::kGradientBoosting};
    ASSERT_EQ(cmd_sweep_techniques(cfg), kExitOk);
    runs.push_back(tree_contents(out));
  }
  EXPECT_FALSE(runs[0].empty());
  EXPECT_EQ(runs[0], runs[1]);
  EXPECT_EQ(runs[0], runs[2]);
}

TEST(CliExitCodes, DocumentedCases) {
  const std::string toy = "--data " + kFixtures + "/toy/data.csv --schema " + kFixtures +
                          "/toy/schema.json --hierarchies " + kFixtures + "/toy/hierarchies";
  const auto out = testing::scratch_dir("cli");
  EXPECT_EQ(run_cli("anonymize " + toy + " --k 3 --suppression-limit 0 --out " + out.string()), 0);
  EXPECT_EQ(testing::read_file(out / "summary.json"),
            testing::read_file(fs::path(kGolden) / "toy_k3" / "summary.json"));
  EXPECT_EQ(run_cli("anonymize " + toy + " --k 3 --l 3 --out " + out.string()), 2);
  EXPECT_EQ(run_cli("anonymize --data /nonexistent.csv --schema " + kFixtures +
                    "/toy/schema.json --k 2 --out " + out.string()),
            1);
  EXPECT_EQ(run_cli("anonymize " + toy + " --k 0 --out " + out.string()), 1);
  EXPECT_EQ(run_cli("anonymize " + toy + " --k 2 --suppression-limit 2 --out " + out.string()), 1);
  EXPECT_EQ(run_cli("bogus"), 1);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(CliExitCodes, JobsFlagDoesNotChangeOutput) {
  const std::string sep = "--data " + kFixtures + "/separable/data.csv --schema " + kFixtures +
                          "/separable/schema.json --reduced-grid --models knn,rf";
  const auto a = testing::scratch_dir("cli_j1"), b = testing::scratch_dir("cli_j3");
  ASSERT_EQ(run_cli("--jobs 1 evaluate " + sep + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli("--jobs 3 evaluate " + sep + " --out " + b.string()), 0);
  EXPECT_EQ(tree_contents(a), tree_contents(b));
}

}  // namespace
}  // namespace anonkit
