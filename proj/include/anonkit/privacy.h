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

// Privacy models measured on a partition: k-anonymity, distinct
// l-diversity, t-closeness and delta-disclosure privacy.
//
// The whole-table sensitive distribution is always taken over the records
// that survive suppression, since that is the table an attacker sees.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/data.h"
#include "anonkit/partition.h"
#include "json.hpp"

namespace anonkit {

struct Distribution {
  std::vector<std::string> support;
  std::vector<double> mass;
};

// Ascending order of sensitive values; numeric order for numeric_ordinal
// attributes whose values all parse as integers.
inline std::vector<std::string> ordered_support(std::vector<std::string> values,
                                                Kind kind) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (kind == Kind::kNumericOrdinal &&
      std::all_of(values.begin(), values.end(), parses_as_integer)) {
    std::stable_sort(values.begin(), values.end(),
                     [](const std::string& a, const std::string& b) {
                       return std::stoll(a) < std::stoll(b);
                     });
  }
  return values;
}

inline Distribution make_distribution(
    const std::vector<std::string>& support,
    const std::map<std::string, std::size_t>& counts) {
  Distribution d{support, std::vector<double>(support.size(), 0.0)};
  std::size_t total = 0;
  for (const auto& [v, n] : counts) total += n;
  if (total == 0) return d;
  for (std::size_t i = 0; i < support.size(); ++i) {
    auto it = counts.find(support[i]);
    if (it != counts.end()) {
      d.mass[i] = static_cast<double>(it->second) / static_cast<double>(total);
    }
  }
  return d;
}

inline void require_same_support(const Distribution& p, const Distribution& q) {
  if (p.support != q.support || p.mass.size() != q.mass.size() ||
      p.mass.size() != p.support.size()) {
    throw Error("distributions are defined on different supports");
  }
}

// Equal ground distance: half the L1 distance.
inline double dist_equal(const Distribution& p, const Distribution& q) {
  require_same_support(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    s += std::abs(p.mass[i] - q.mass[i]);
  }
  return 0.5 * s;
}

// Earth mover's distance under the ordered ground distance |i-j|/(m-1):
// the sum of absolute cumulative differences, normalized by m-1.
inline double emd_ordered(const Distribution& p, const Distribution& q) {
  require_same_support(p, q);
  const auto m = p.mass.size();
  if (m <= 1) return 0.0;
  double cumulative = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    cumulative += p.mass[i] - q.mass[i];
    s += std::abs(cumulative);
  }
  return s / static_cast<double>(m - 1);
}

namespace internal {

inline void require_classes(const Partition& p, const char* what) {
  if (p.classes.empty()) {
    throw Error(std::string(what) + ": partition has no equivalence classes");
  }
}

inline std::map<std::string, std::size_t> pooled_counts(const Partition& p) {
  std::map<std::string, std::size_t> out;
  for (const auto& c : p.classes) {
    for (const auto& [v, n] : c.sa_counts) out[v] += n;
  }
  return out;
}

}  // namespace internal

inline std::size_t achieved_k(const Partition& p) {
  internal::require_classes(p, "achieved_k");
  std::size_t k = p.classes.front().size();
  for (const auto& c : p.classes) k = std::min(k, c.size());
  return k;
}

inline std::size_t achieved_l(const Partition& p) {
  internal::require_classes(p, "achieved_l");
  std::size_t l = std::numeric_limits<std::size_t>::max();
  for (const auto& c : p.classes) {
    std::size_t distinct = 0;
    for (const auto& [v, n] : c.sa_counts) distinct += n > 0 ? 1 : 0;
    l = std::min(l, distinct);
  }
  return l;
}

// Largest distance between a class's sensitive distribution and the pooled
// one: ordered EMD for numeric_ordinal attributes, equal distance otherwise.
inline double achieved_t(const Partition& p, Kind kind) {
  internal::require_classes(p, "achieved_t");
  const auto pooled = internal::pooled_counts(p);
  std::vector<std::string> values;
  for (const auto& [v, n] : pooled) values.push_back(v);
  const auto support = ordered_support(values, kind);
  const auto global = make_distribution(support, pooled);
  double t = 0.0;
  for (const auto& c : p.classes) {
    const auto local = make_distribution(support, c.sa_counts);
    const double dist = kind == Kind::kNumericOrdinal ? emd_ordered(local, global)
                                                      : dist_equal(local, global);
    t = std::max(t, dist);
  }
  return t;
}

// max |ln(p(EC,s) / p(DB,s))| over classes and the sensitive values present
// in each class. Values absent from a class are skipped (the log is
// undefined there), which keeps the result finite.
inline double achieved_delta(const Partition& p) {
  internal::require_classes(p, "achieved_delta");
  const auto pooled = internal::pooled_counts(p);
  std::size_t total = 0;
  for (const auto& [v, n] : pooled) total += n;
  double delta = 0.0;
  for (const auto& c : p.classes) {
    const auto size = static_cast<double>(c.size());
    for (const auto& [v, n] : c.sa_counts) {
      if (n == 0) continue;
      const double local = static_cast<double>(n) / size;
      const double global =
          static_cast<double>(pooled.at(v)) / static_cast<double>(total);
      delta = std::max(delta, std::abs(std::log(local / global)));
    }
  }
  return delta;
}

struct PrivacyRequirement {
  std::size_t k = 1;
  std::optional<std::size_t> l;
  std::optional<double> t;
  std::optional<double> delta;

  std::string to_string() const {
    std::string s = "k=" + std::to_string(k);
    auto num = [](double x) {
      std::string out = std::to_string(x);
      out.erase(out.find_last_not_of('0') + 1);
      if (!out.empty() && out.back() == '.') out.pop_back();
      return out;
    };
    if (l) s += ",l=" + std::to_string(*l);
    if (t) s += ",t=" + num(*t);
    if (delta) s += ",delta=" + num(*delta);
    return s;
  }
};

inline void validate_requirement(const PrivacyRequirement& r) {
  if (r.k < 1) throw Error("requirement: k must be >= 1");
  if (r.l && *r.l < 1) throw Error("requirement: l must be >= 1");
  if (r.t && (*r.t < 0.0 || *r.t > 1.0)) throw Error("requirement: t must lie in [0, 1]");
  if (r.delta && !(*r.delta > 0.0)) throw Error("requirement: delta must be positive");
}

struct PrivacyAudit {
  std::size_t achieved_k = 0;
  std::size_t achieved_l = 0;
  double achieved_t = 0.0;
  double achieved_delta = 0.0;
  std::size_t class_count = 0;
  std::size_t record_count = 0;
  std::size_t suppressed = 0;

  bool operator==(const PrivacyAudit&) const = default;
};

inline PrivacyAudit audit_partition(const Partition& p, Kind sensitive_kind,
                                    std::size_t suppressed_count) {
  PrivacyAudit a;
  a.achieved_k = achieved_k(p);
  a.achieved_l = achieved_l(p);
  a.achieved_t = achieved_t(p, sensitive_kind);
  a.achieved_delta = achieved_delta(p);
  a.class_count = p.classes.size();
  a.record_count = p.covered_count();
  a.suppressed = suppressed_count;
  return a;
}

// Audits a released (already generalized, suppression-filtered) table.
inline PrivacyAudit audit(const Dataset& d, std::size_t suppressed_count = 0) {
  if (d.rows.empty()) throw Error("audit: dataset is empty");
  const auto kind = d.schema.attributes[d.schema.sensitive_index()].kind;
  return audit_partition(partition_classes(d), kind, suppressed_count);
}

// t is met when achieved_t <= t (+kTolerance); delta needs the strict
// achieved_delta < delta, so values within kTolerance of the bound fail.
inline bool audit_meets(const PrivacyAudit& a, const PrivacyRequirement& r) {
  if (a.class_count == 0) return false;
  if (a.achieved_k < r.k) return false;
  if (r.l && a.achieved_l < *r.l) return false;
  if (r.t && a.achieved_t > *r.t + kTolerance) return false;
  if (r.delta && !(a.achieved_delta < *r.delta - kTolerance)) return false;
  return true;
}

inline bool satisfies(const Partition& p, const PrivacyRequirement& r, Kind kind) {
  if (p.classes.empty()) return false;
  return audit_meets(audit_partition(p, kind, p.suppressed.size()), r);
}

// Report keys: k, l, t, delta, classes, records, suppressed.
inline nlohmann::ordered_json audit_to_json(const PrivacyAudit& a) {
  nlohmann::ordered_json j;
  j["k"] = a.achieved_k;
  j["l"] = a.achieved_l;
  j["t"] = a.achieved_t;
  if (std::isfinite(a.achieved_delta)) {
    j["delta"] = a.achieved_delta;
  } else {
    j["delta"] = nullptr;
  }
  j["classes"] = a.class_count;
  j["records"] = a.record_count;
  j["suppressed"] = a.suppressed;
  return j;
}

inline nlohmann::ordered_json requirement_to_json(const PrivacyRequirement& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["l"] = r.l ? nlohmann::ordered_json(*r.l) : nlohmann::ordered_json(nullptr);
  j["t"] = r.t ? nlohmann::ordered_json(*r.t) : nlohmann::ordered_json(nullptr);
  j["delta"] = r.delta ? nlohmann::ordered_json(*r.delta) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace anonkit
