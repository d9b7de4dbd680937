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

#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/data.h"
#include "anonkit/hierarchy.h"

namespace anonkit {

// One level per quasi-identifier, in schema order.
struct GeneralizationVector {
  std::vector<int> levels;

  auto operator<=>(const GeneralizationVector&) const = default;
  bool operator==(const GeneralizationVector&) const = default;

  int level_sum() const {
    int s = 0;
    for (int l : levels) s += l;
    return s;
  }

  // Componentwise <=.
  bool below_or_equal(const GeneralizationVector& other) const {
    if (levels.size() != other.levels.size()) return false;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] > other.levels[i]) return false;
    }
    return true;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < levels.size(); ++i) {
      s += (i ? "," : "") + std::to_string(levels[i]);
    }
    return s + ")";
  }
};

struct EquivalenceClass {
  std::vector<std::string> signature;
  std::vector<std::size_t> members;
  std::map<std::string, std::size_t> sa_counts;

  std::size_t size() const { return members.size(); }
};

struct Partition {
  // Ascending by signature.
  std::vector<EquivalenceClass> classes;
  std::vector<std::size_t> suppressed;
  std::size_t source_count = 0;

  std::size_t covered_count() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.size();
    return n;
  }
};

// Replaces every quasi-identifier cell by its level-g[i] generalization.
inline Dataset apply_generalization(const Dataset& d, const HierarchySet& hs,
                                    const GeneralizationVector& g) {
  const auto qis = d.schema.quasi_identifier_indices();
  if (g.levels.size() != qis.size()) {
    throw Error("generalization vector has " + std::to_string(g.levels.size()) +
                " levels for " + std::to_string(qis.size()) +
                " quasi-identifiers");
  }
  std::vector<const Hierarchy*> per_qi(qis.size(), nullptr);
  for (std::size_t q = 0; q < qis.size(); ++q) {
    const auto& name = d.schema.attributes[qis[q]].name;
    auto it = hs.find(name);
    if (it != hs.end()) {
      per_qi[q] = &it->second;
    } else if (g.levels[q] != 0) {
      throw Error("no hierarchy for '" + name + "' but level " +
                  std::to_string(g.levels[q]) + " requested");
    }
    if (per_qi[q] && (g.levels[q] < 0 || g.levels[q] > per_qi[q]->height())) {
      throw Error("level " + std::to_string(g.levels[q]) + " outside [0, " +
                  std::to_string(per_qi[q]->height()) + "] for '" + name + "'");
    }
  }
  Dataset out{d.schema, d.rows};
  for (auto& row : out.rows) {
    for (std::size_t q = 0; q < qis.size(); ++q) {
      if (per_qi[q] == nullptr) continue;
      auto& cell = row[qis[q]];
      if (g.levels[q] == 0) {
        if (!per_qi[q]->contains(cell)) per_qi[q]->generalize(cell, 0);
        continue;
      }
      cell = per_qi[q]->generalize(cell, g.levels[q]);
    }
  }
  return out;
}

// Groups rows by exact equality of their quasi-identifier tuple.
inline Partition partition_classes(const Dataset& d) {
  const auto qis = d.schema.quasi_identifier_indices();
  const auto sa = d.schema.sensitive_index();
  std::map<std::vector<std::string>, EquivalenceClass> groups;
  std::vector<std::string> key(qis.size());
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    for (std::size_t q = 0; q < qis.size(); ++q) key[q] = d.rows[r][qis[q]];
    auto it = groups.find(key);
    if (it == groups.end()) {
      it = groups.emplace(key, EquivalenceClass{key, {}, {}}).first;
    }
    it->second.members.push_back(r);
    ++it->second.sa_counts[d.rows[r][sa]];
  }
  Partition p;
  p.source_count = d.rows.size();
  p.classes.reserve(groups.size());
  for (auto& [sig, ec] : groups) p.classes.push_back(std::move(ec));
  return p;
}

// Moves every class smaller than k into the suppressed list.
inline Partition suppress_small_classes(const Partition& p, std::size_t k) {
  if (k < 1) throw Error("suppress_small_classes: k must be >= 1");
  Partition out;
  out.source_count = p.source_count;
  out.suppressed = p.suppressed;
  for (const auto& c : p.classes) {
    if (c.size() < k) {
      out.suppressed.insert(out.suppressed.end(), c.members.begin(),
                            c.members.end());
    } else {
      out.classes.push_back(c);
    }
  }
  return out;
}

// Structural check used by tests and debug paths: classes and the suppressed
// list are disjoint, cover 0..source_count-1, signatures are distinct and
// ascending, and sensitive counts add up.
inline bool partition_is_valid(const Partition& p, std::string* why = nullptr) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  std::vector<char> seen(p.source_count, 0);
  auto mark = [&](std::size_t r) {
    if (r >= p.source_count || seen[r]) return false;
    seen[r] = 1;
    return true;
  };
  for (std::size_t i = 0; i < p.classes.size(); ++i) {
    const auto& c = p.classes[i];
    if (c.members.empty()) return fail("empty class");
    if (i > 0 && !(p.classes[i - 1].signature < c.signature)) {
      return fail("signatures not strictly ascending");
    }
    std::size_t total = 0;
    for (const auto& [v, n] : c.sa_counts) total += n;
    if (total != c.members.size()) return fail("sa_counts do not sum to size");
    for (auto r : c.members) {
      if (!mark(r)) return fail("row " + std::to_string(r) + " repeated or out of range");
    }
  }
  for (auto r : p.suppressed) {
    if (!mark(r)) return fail("suppressed row " + std::to_string(r) + " repeated or out of range");
  }
  for (std::size_t r = 0; r < p.source_count; ++r) {
    if (!seen[r]) return fail("row " + std::to_string(r) + " not covered");
  }
  return true;
}

// Drops the suppressed rows, preserving the order of the rest.
inline Dataset remove_suppressed(const Dataset& d, const Partition& p) {
  std::vector<char> drop(d.rows.size(), 0);
  for (auto r : p.suppressed) drop.at(r) = 1;
  Dataset out{d.schema, {}};
  out.rows.reserve(d.rows.size() - p.suppressed.size());
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    if (!drop[r]) out.rows.push_back(d.rows[r]);
  }
  return out;
}

}  // namespace anonkit
