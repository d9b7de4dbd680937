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

// Full-domain generalization search over the hierarchy lattice.
//
// A node fixes one level per quasi-identifier. Evaluating a node generalizes
// the table, groups it into equivalence classes, suppresses classes smaller
// than k and then checks the whole requirement on what survives.
//
// Among satisfying nodes the search returns the minimum under the cost order
//   1. normalized level sum, sum of level_i / height_i over attributes with
//      height_i > 0 (compared exactly as integers over a common denominator);
//   2. number of suppressed records;
//   3. lexicographic order of the level vector.
// Nodes are visited in strata of equal normalized level sum, lowest first.
// The first stratum holding a satisfying node is evaluated completely and
// the search stops there.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/data.h"
#include "anonkit/hierarchy.h"
#include "anonkit/partition.h"
#include "anonkit/privacy.h"

namespace anonkit {

// Every level vector within the heights, by ascending level sum and then
// lexicographically.
inline std::vector<GeneralizationVector> lattice_nodes(std::span<const int> heights) {
  std::size_t total = 1;
  for (int h : heights) {
    if (h < 0) throw Error("lattice: negative hierarchy height");
    total *= static_cast<std::size_t>(h) + 1;
  }
  // Mixed-radix decoding with the last position fastest gives lex order.
  std::vector<GeneralizationVector> nodes(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    auto& levels = nodes[idx].levels;
    levels.resize(heights.size());
    std::size_t rest = idx;
    for (std::size_t i = heights.size(); i-- > 0;) {
      const auto radix = static_cast<std::size_t>(heights[i]) + 1;
      levels[i] = static_cast<int>(rest % radix);
      rest /= radix;
    }
  }
  std::stable_sort(nodes.begin(), nodes.end(),
                   [](const auto& a, const auto& b) { return a.level_sum() < b.level_sum(); });
  return nodes;
}

struct SearchConfig {
  // Largest fraction of input rows that may be suppressed.
  double suppression_limit = 1.0;
  PrivacyRequirement requirement;
};

inline std::size_t suppression_budget(double limit, std::size_t rows) {
  if (limit < 0.0 || limit > 1.0) throw Error("suppression limit must lie in [0, 1]");
  return static_cast<std::size_t>(
      std::floor(limit * static_cast<double>(rows) + kTolerance));
}

// Exact normalized level sums: each level is scaled by lcm(heights)/height.
class LevelSumScale {
 public:
  explicit LevelSumScale(std::span<const int> heights)
      : heights_(heights.begin(), heights.end()) {
    for (int h : heights_) {
      if (h > 0) lcm_ = std::lcm(lcm_, static_cast<std::int64_t>(h));
    }
  }

  std::int64_t scaled(const GeneralizationVector& g) const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < heights_.size(); ++i) {
      if (heights_[i] > 0) s += g.levels[i] * (lcm_ / heights_[i]);
    }
    return s;
  }

  double normalized(const GeneralizationVector& g) const {
    return static_cast<double>(scaled(g)) / static_cast<double>(lcm_);
  }

 private:
  std::vector<int> heights_;
  std::int64_t lcm_ = 1;
};

struct NodeEvaluation {
  GeneralizationVector node;
  bool satisfies = false;
  // k holds with at least one surviving class, within the suppression budget.
  bool k_satisfied = false;
  std::size_t suppressed = 0;
  Partition partition;
  std::optional<PrivacyAudit> audit;
  // Requirement clauses violated (k/budget counted as one); 0 iff satisfies.
  int violations = 0;
};

inline NodeEvaluation evaluate_node(const Dataset& d, const HierarchySet& hs,
                                    const GeneralizationVector& g,
                                    const SearchConfig& cfg,
                                    bool k_known_satisfied = false) {
  NodeEvaluation ev;
  ev.node = g;
  const auto generalized = apply_generalization(d, hs, g);
  ev.partition = suppress_small_classes(partition_classes(generalized),
                                        cfg.requirement.k);
  ev.suppressed = ev.partition.suppressed.size();
  const auto budget = suppression_budget(cfg.suppression_limit, d.row_count());
  ev.k_satisfied = k_known_satisfied ||
                   (!ev.partition.classes.empty() && ev.suppressed <= budget);
  if (!ev.k_satisfied) ++ev.violations;
  if (!ev.partition.classes.empty()) {
    const auto kind = d.schema.attributes[d.schema.sensitive_index()].kind;
    ev.audit = audit_partition(ev.partition, kind, ev.suppressed);
    const auto& r = cfg.requirement;
    const auto& a = *ev.audit;
    if (r.l && a.achieved_l < *r.l) ++ev.violations;
    if (r.t && a.achieved_t > *r.t + kTolerance) ++ev.violations;
    if (r.delta && !(a.achieved_delta < *r.delta - kTolerance)) ++ev.violations;
  }
  ev.satisfies = ev.violations == 0;
  return ev;
}

struct AnonymizationCost {
  double normalized_level_sum = 0.0;
  std::size_t suppressed_count = 0;
};

struct AnonymizationResult {
  GeneralizationVector node;
  // Generalized table with suppressed rows removed.
  Dataset output;
  std::size_t suppressed_count = 0;
  PrivacyAudit audit;
  AnonymizationCost cost;
  std::size_t nodes_evaluated = 0;
};

class UnsatisfiableError : public Error {
 public:
  UnsatisfiableError(const std::string& what, std::optional<PrivacyAudit> best,
                     std::optional<GeneralizationVector> best_node)
      : Error(what), best_audit(std::move(best)), best_node(std::move(best_node)) {}

  // Closest miss: fewest violated clauses, then the cost order. Empty when no
  // node kept a single class.
  std::optional<PrivacyAudit> best_audit;
  std::optional<GeneralizationVector> best_node;
};

struct SearchOptions {
  int jobs = 1;
};

inline AnonymizationResult anonymize(const Dataset& d, const HierarchySet& hs,
                                     const SearchConfig& cfg,
                                     SearchOptions options = {}) {
  validate_requirement(cfg.requirement);
  check_coverage(d, hs);
  const auto heights = hierarchy_heights(d.schema, hs);
  const LevelSumScale scale(heights);

  auto nodes = lattice_nodes(heights);
  std::stable_sort(nodes.begin(), nodes.end(), [&](const auto& a, const auto& b) {
    const auto sa = scale.scaled(a), sb = scale.scaled(b);
    return sa != sb ? sa < sb : a < b;
  });

  auto cost_less = [&](const NodeEvaluation& a, const NodeEvaluation& b) {
    const auto sa = scale.scaled(a.node), sb = scale.scaled(b.node);
    if (sa != sb) return sa < sb;
    if (a.suppressed != b.suppressed) return a.suppressed < b.suppressed;
    return a.node < b.node;
  };

  // Nodes known to satisfy the k component. Suppression-based k-anonymity is
  // monotone under coarsening, so their ancestors skip the k check.
  std::vector<GeneralizationVector> k_roots;
  std::optional<NodeEvaluation> closest;
  std::size_t evaluated = 0;

  std::size_t begin = 0;
  while (begin < nodes.size()) {
    std::size_t end = begin;
    const auto stratum = scale.scaled(nodes[begin]);
    while (end < nodes.size() && scale.scaled(nodes[end]) == stratum) ++end;

    std::vector<NodeEvaluation> results(end - begin);
    std::vector<char> k_known(end - begin, 0);
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& root : k_roots) {
        if (root.below_or_equal(nodes[i])) {
          k_known[i - begin] = 1;
          break;
        }
      }
    }
    parallel_for(end - begin, options.jobs, [&](std::size_t i) {
      results[i] = evaluate_node(d, hs, nodes[begin + i], cfg, k_known[i] != 0);
    });
    evaluated += end - begin;

    const NodeEvaluation* best = nullptr;
    for (auto& ev : results) {
      if (ev.k_satisfied) k_roots.push_back(ev.node);
      if (ev.satisfies) {
        if (!best || cost_less(ev, *best)) best = &ev;
      } else if (ev.audit) {
        if (!closest || ev.violations < closest->violations ||
            (ev.violations == closest->violations && cost_less(ev, *closest))) {
          closest = ev;
        }
      }
    }
    if (best) {
      AnonymizationResult out;
      out.node = best->node;
      out.suppressed_count = best->suppressed;
      out.audit = *best->audit;
      out.cost = {scale.normalized(best->node), best->suppressed};
      out.output = remove_suppressed(apply_generalization(d, hs, best->node),
                                     best->partition);
      out.nodes_evaluated = evaluated;
      return out;
    }
    begin = end;
  }

  std::string msg = "unsatisfiable requirement " + cfg.requirement.to_string() +
                    " within suppression limit " +
                    std::to_string(cfg.suppression_limit);
  if (closest) throw UnsatisfiableError(msg, closest->audit, closest->node);
  throw UnsatisfiableError(msg, std::nullopt, std::nullopt);
}

}  // namespace anonkit
