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

// Builders, random generators and brute-force oracles shared by the tests.
// The oracles deliberately avoid the library's grouping and distance code.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "anonkit/anonymizer.h"
#include "anonkit/data.h"
#include "anonkit/hierarchy.h"
#include "anonkit/partition.h"
#include "anonkit/privacy.h"

namespace anonkit::testing {

inline std::string data_dir() { return ANONKIT_DATA_DIR; }
inline std::string adult_dir() { return data_dir() + "/adult"; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("anonkit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Schema with QIs q0..q{n-1} (categorical) and a sensitive column "sa".
inline Schema qi_schema(std::size_t qis, Kind sa_kind = Kind::kCategorical,
                        std::optional<std::string> positive = std::nullopt) {
  Schema s;
  for (std::size_t i = 0; i < qis; ++i) {
    s.attributes.push_back({"q" + std::to_string(i), Role::kQuasiIdentifier, Kind::kCategorical});
  }
  s.attributes.push_back({"sa", Role::kSensitive, sa_kind});
  s.positive_label = std::move(positive);
  return s;
}

inline Dataset make_dataset(Schema schema, std::vector<Row> rows) {
  return Dataset{std::move(schema), std::move(rows)};
}

// Hierarchy over values "v0".."v{n-1}": level 1 groups pairs ("g0", "g1",
// ...), level 2 (if height 2) is "*". Height 1 maps straight to "*".
inline Hierarchy pair_hierarchy(const std::string& attr, int values, int height) {
  std::unordered_map<std::string, std::vector<std::string>> paths;
  for (int v = 0; v < values; ++v) {
    const auto key = "v" + std::to_string(v);
    std::vector<std::string> path{key};
    if (height >= 2) path.push_back("g" + std::to_string(v / 2));
    for (int l = static_cast<int>(path.size()); l <= height; ++l) path.push_back("*");
    paths.emplace(key, std::move(path));
  }
  return Hierarchy::from_paths(attr, std::move(paths));
}

struct RandomInstance {
  Dataset data;
  HierarchySet hierarchies;
};

// Random table: up to max_rows rows, 1..max_qis QIs over v0..v{n-1} with
// heights in [0, 2], sensitive attribute with `labels` values ("s0", ...).
inline RandomInstance random_instance(Rng& rng, std::size_t max_rows, std::size_t max_qis,
                                      int labels = 2) {
  RandomInstance out;
  const std::size_t qis = 1 + uniform_below(rng, max_qis);
  const std::size_t rows = 1 + uniform_below(rng, max_rows);
  Schema schema = qi_schema(qis);
  std::vector<int> domain(qis);
  for (std::size_t q = 0; q < qis; ++q) {
    domain[q] = 1 + static_cast<int>(uniform_below(rng, 6));
    const int height = static_cast<int>(uniform_below(rng, 3));
    const auto& name = schema.attributes[q].name;
    out.hierarchies.emplace(name, height == 0 ? Hierarchy::identity(name)
                                              : pair_hierarchy(name, domain[q], height));
  }
  // Skew the label distribution per instance so distances vary.
  std::vector<double> weights(static_cast<std::size_t>(labels));
  for (auto& w : weights) w = 1.0 + static_cast<double>(uniform_below(rng, 5));
  std::discrete_distribution<int> label_dist(weights.begin(), weights.end());
  std::vector<Row> data;
  for (std::size_t r = 0; r < rows; ++r) {
    Row row;
    for (std::size_t q = 0; q < qis; ++q) {
      row.push_back("v" + std::to_string(uniform_below(rng, static_cast<std::size_t>(domain[q]))));
    }
    row.push_back("s" + std::to_string(label_dist(rng)));
    data.push_back(std::move(row));
  }
  out.data = make_dataset(schema, std::move(data));
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force audit oracle. Classes are found by comparing every row with
// every other row; distances are computed from raw counts.

struct OracleAudit {
  std::size_t k = 0;
  std::size_t l = 0;
  double t = 0.0;
  double delta = 0.0;
  std::size_t classes = 0;
};

inline OracleAudit oracle_audit(const Dataset& d, bool ordered_sa = false) {
  const auto qis = d.schema.quasi_identifier_indices();
  const auto sa = d.schema.sensitive_index();
  const std::size_t n = d.rows.size();
  auto same_qi = [&](std::size_t a, std::size_t b) {
    for (auto q : qis) {
      if (d.rows[a][q] != d.rows[b][q]) return false;
    }
    return true;
  };
  std::set<std::string> value_set;
  for (const auto& row : d.rows) value_set.insert(row[sa]);
  std::vector<std::string> values(value_set.begin(), value_set.end());
  if (ordered_sa) {
    std::sort(values.begin(), values.end(), [](const std::string& a, const std::string& b) {
      return std::stoll(a) < std::stoll(b);
    });
  }
  auto count_in = [&](const std::vector<std::size_t>& rows, const std::string& v) {
    std::size_t c = 0;
    for (auto r : rows) c += d.rows[r][sa] == v;
    return c;
  };
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;

  OracleAudit a;
  a.k = std::numeric_limits<std::size_t>::max();
  a.l = std::numeric_limits<std::size_t>::max();
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    std::vector<std::size_t> members;
    for (std::size_t j = i; j < n; ++j) {
      if (!seen[j] && same_qi(i, j)) {
        members.push_back(j);
        seen[j] = true;
      }
    }
    ++a.classes;
    a.k = std::min(a.k, members.size());
    std::size_t distinct = 0;
    double l1 = 0.0, cum = 0.0, emd = 0.0;
    for (const auto& v : values) {
      const double pc = static_cast<double>(count_in(members, v)) / static_cast<double>(members.size());
      const double pg = static_cast<double>(count_in(all, v)) / static_cast<double>(n);
      if (pc > 0.0) {
        ++distinct;
        a.delta = std::max(a.delta, std::fabs(std::log(pc / pg)));
      }
      l1 += std::fabs(pc - pg);
      cum += pc - pg;
      emd += std::fabs(cum);
    }
    a.l = std::min(a.l, distinct);
    double dist = 0.5 * l1;
    if (ordered_sa) dist = values.size() > 1 ? emd / static_cast<double>(values.size() - 1) : 0.0;
    a.t = std::max(a.t, dist);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Exhaustive anonymizer oracle: evaluates every node without pruning and
// keeps the minimum of (normalized level sum, suppressed, node).

struct OracleChoice {
  std::optional<GeneralizationVector> node;
  std::size_t suppressed = 0;
};

inline OracleChoice oracle_anonymize(const Dataset& d, const HierarchySet& hs,
                                     const SearchConfig& cfg) {
  const auto qis = d.schema.quasi_identifier_indices();
  std::vector<int> heights;
  for (auto q : qis) heights.push_back(hs.at(d.schema.attributes[q].name).height());
  // Enumerate with a plain odometer.
  std::vector<GeneralizationVector> nodes;
  std::vector<int> cur(heights.size(), 0);
  while (true) {
    nodes.push_back({cur});
    std::size_t i = 0;
    while (i < cur.size() && cur[i] == heights[i]) cur[i++] = 0;
    if (i == cur.size()) break;
    ++cur[i];
  }
  const std::size_t budget =
      static_cast<std::size_t>(std::floor(cfg.suppression_limit * static_cast<double>(d.rows.size()) + 1e-9));
  const auto kind = d.schema.attributes[d.schema.sensitive_index()].kind;

  OracleChoice best;
  double best_cost = 0.0;
  for (const auto& g : nodes) {
    // Generalize and group by brute force.
    Dataset gen = d;
    for (std::size_t q = 0; q < qis.size(); ++q) {
      const auto& h = hs.at(d.schema.attributes[qis[q]].name);
      for (auto& row : gen.rows) row[qis[q]] = h.generalize(row[qis[q]], g.levels[q]);
    }
    std::map<std::vector<std::string>, std::size_t> sizes;
    for (const auto& row : gen.rows) {
      std::vector<std::string> key;
      for (auto q : qis) key.push_back(row[q]);
      ++sizes[key];
    }
    Dataset kept{gen.schema, {}};
    std::size_t suppressed = 0;
    for (const auto& row : gen.rows) {
      std::vector<std::string> key;
      for (auto q : qis) key.push_back(row[q]);
      if (sizes[key] < cfg.requirement.k) {
        ++suppressed;
      } else {
        kept.rows.push_back(row);
      }
    }
    if (kept.rows.empty() || suppressed > budget) continue;
    const auto a = oracle_audit(kept, kind == Kind::kNumericOrdinal);
    const auto& r = cfg.requirement;
    if (a.k < r.k) continue;
    if (r.l && a.l < *r.l) continue;
    if (r.t && a.t > *r.t + 1e-9) continue;
    if (r.delta && !(a.delta < *r.delta - 1e-9)) continue;
    double cost = 0.0;
    for (std::size_t i = 0; i < heights.size(); ++i) {
      if (heights[i] > 0) cost += static_cast<double>(g.levels[i]) / heights[i];
    }
    const bool better =
        !best.node || cost < best_cost - 1e-12 ||
        (std::fabs(cost - best_cost) <= 1e-12 &&
         (suppressed < best.suppressed || (suppressed == best.suppressed && g < *best.node)));
    if (better) {
      best.node = g;
      best.suppressed = suppressed;
      best_cost = cost;
    }
  }
  return best;
}

// Pairwise concordance: P(score+ > score-) + 0.5 P(=).
inline double concordance_auc(const std::vector<int>& labels, const std::vector<double>& scores) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace anonkit::testing
