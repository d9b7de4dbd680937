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

// Utility and classification-quality metrics.

#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/partition.h"

namespace anonkit {

// Average equivalence class size, |records| / (k * |classes|), where
// records counts what is left after suppression. 1.0 means every class has
// exactly k members.
inline double avg_class_size_metric(std::size_t record_count, std::size_t k,
                                    std::size_t class_count) {
  if (class_count == 0) throw Error("avg_class_size_metric: no equivalence classes");
  if (k < 1) throw Error("avg_class_size_metric: k must be >= 1");
  return static_cast<double>(record_count) /
         (static_cast<double>(k) * static_cast<double>(class_count));
}

// Classification metric: the fraction of original records that were
// suppressed or carry a non-majority label within their class. The count
// penalized in a class is the same whichever modal label wins a tie.
inline double classification_metric(std::size_t original_count,
                                    std::size_t suppressed_count,
                                    const Partition& p) {
  if (original_count == 0) throw Error("classification_metric: original count is 0");
  std::size_t penalties = suppressed_count;
  for (const auto& c : p.classes) {
    std::size_t modal = 0;
    for (const auto& [v, n] : c.sa_counts) modal = std::max(modal, n);
    penalties += c.size() - modal;
  }
  if (penalties > original_count) {
    throw Error("classification_metric: more penalized rows than original records");
  }
  return static_cast<double>(penalties) / static_cast<double>(original_count);
}

inline double classification_metric(std::size_t original_count, const Partition& p) {
  return classification_metric(original_count, p.suppressed.size(), p);
}

inline double accuracy(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size()) throw Error("accuracy: length mismatch");
  if (labels.empty()) throw Error("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += labels[i] == predictions[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

struct EvalReport {
  double accuracy = 0.0;
  double auc = 0.0;
  // Area under the two-segment curve of the 0/1 predictions; equals the
  // mean of sensitivity and specificity.
  double label_auc = 0.0;
  std::vector<RocPoint> roc_points;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

inline double trapezoid_area(std::span<const RocPoint> pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  }
  return area;
}

// ROC curve with one point per distinct score (descending thresholds, tied
// scores enter together) and its trapezoidal area. Fills everything except
// accuracy.
inline EvalReport roc_auc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw Error("roc_auc: length mismatch");
  EvalReport r;
  for (int y : labels) (y ? r.positives : r.negatives)++;
  if (r.positives == 0 || r.negatives == 0) {
    throw Error("roc_auc: both classes must be present");
  }
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  r.roc_points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? tp : fp)++;
      ++i;
    }
    r.roc_points.push_back({static_cast<double>(fp) / static_cast<double>(r.negatives),
                            static_cast<double>(tp) / static_cast<double>(r.positives)});
  }
  r.auc = trapezoid_area(r.roc_points);
  return r;
}

// Two columns, fpr and tpr, for external plotting.
inline void write_roc_points(std::ostream& out, std::span<const RocPoint> pts) {
  out << "fpr,tpr\n";
  out.precision(17);
  for (const auto& p : pts) out << p.fpr << ',' << p.tpr << '\n';
}

}  // namespace anonkit
