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

// Cross-validated grid search on stratified, seeded folds. The selection
// criterion is mean validation accuracy; ties keep the earlier grid point.
//
// Some families share work across grid points without changing results:
// kNN ranks neighbours once per fold for the largest k, and boosting fits
// the longest stage sequence once per remaining parameter combination and
// scores its prefixes (a model with n stages is the first n stages of one
// with more).

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/ml/encoder.h"
#include "anonkit/ml/model.h"

namespace anonkit::ml {

// Fold index per row. Each label's rows are shuffled (labels in ascending
// order, one generator) and dealt round-robin.
inline std::vector<std::size_t> stratified_folds(std::span<const int> labels,
                                                 std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error("cv: need at least 2 folds");
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  std::vector<std::size_t> fold_of(labels.size());
  Rng rng(seed);
  for (auto& [label, rows] : groups) {
    if (rows.size() < folds) {
      throw Error("cv: label " + std::to_string(label) + " has " + std::to_string(rows.size()) +
                  " rows, fewer than " + std::to_string(folds) + " folds");
    }
    fisher_yates(rows, rng);
    for (std::size_t i = 0; i < rows.size(); ++i) fold_of[rows[i]] = i % folds;
  }
  return fold_of;
}

namespace internal {

inline double accuracy_of(std::span<const int> labels, const std::vector<int>& predicted) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += labels[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

// Validation accuracy of every grid point on one fold.
inline std::vector<double> fold_accuracies(Family family, const std::vector<Params>& points,
                                           std::uint64_t seed, const LabeledMatrix& train,
                                           const LabeledMatrix& val) {
  std::vector<double> out(points.size(), 0.0);
  auto spec_for = [&](const Params& p) { return ModelSpec{family, p, seed}; };

  if (family == Family::kKnn) {
    std::size_t max_k = 0;
    for (const auto& p : points) {
      max_k = std::max(max_k, static_cast<std::size_t>(spec_for(p).int_param("n_neighbors")));
    }
    KnnModel model(train, max_k);
    std::vector<std::vector<std::uint32_t>> nearest(val.rows);
    for (std::size_t i = 0; i < val.rows; ++i) nearest[i] = model.nearest(val.row(i), max_k);
    for (std::size_t g = 0; g < points.size(); ++g) {
      const auto k = static_cast<std::size_t>(spec_for(points[g]).int_param("n_neighbors"));
      if (k < 1 || k > train.rows) throw Error("knn: neighbors out of range");
      std::vector<int> predicted(val.rows);
      for (std::size_t i = 0; i < val.rows; ++i) {
        predicted[i] = model.score_from(nearest[i], k) >= 0.5 ? 1 : 0;
      }
      out[g] = accuracy_of(val.labels, predicted);
    }
    return out;
  }

  if (family == Family::kAdaBoost || family == Family::kGradientBoosting) {
    // Group points by everything except n_estimators.
    std::map<Params, std::vector<std::size_t>> groups;
    for (std::size_t g = 0; g < points.size(); ++g) {
      auto key = points[g];
      key.erase("n_estimators");
      groups[key].push_back(g);
    }
    for (const auto& [key, members] : groups) {
      int longest = 0;
      for (auto g : members) {
        longest = std::max(longest, spec_for(points[g]).int_param("n_estimators"));
      }
      auto spec = spec_for(points[members.front()]);
      spec.params["n_estimators"] = longest;
      const auto model = fit_model(spec, train);
      for (auto g : members) {
        const auto stages = static_cast<std::size_t>(spec_for(points[g]).int_param("n_estimators"));
        std::vector<int> predicted(val.rows);
        for (std::size_t i = 0; i < val.rows; ++i) {
          const double score = std::visit(
              [&](const auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, AdaBoostModel> || std::is_same_v<M, GBoostModel>) {
                  return m.predict(val.row(i), stages);
                } else {
                  return m.predict(val.row(i));
                }
              },
              model.impl());
          predicted[i] = score >= 0.5 ? 1 : 0;
        }
        out[g] = accuracy_of(val.labels, predicted);
      }
    }
    return out;
  }

  for (std::size_t g = 0; g < points.size(); ++g) {
    const auto model = fit_model(spec_for(points[g]), train);
    out[g] = accuracy_of(val.labels, model.predict_labels(val));
  }
  return out;
}

}  // namespace internal

struct GridSearchResult {
  ModelSpec best;
  std::vector<Params> points;
  std::vector<double> mean_accuracy;  // per point
  std::size_t best_index = 0;
};

inline GridSearchResult grid_search_cv(Family family, const ParamGrid& grid,
                                       const LabeledMatrix& train, std::size_t folds,
                                       std::uint64_t seed, int jobs = 1) {
  GridSearchResult r;
  r.points = expand_grid(grid);
  if (grid.empty() || r.points.empty()) throw Error("grid_search_cv: empty grid");
  const auto fold_of = stratified_folds(train.labels, folds, seed);

  std::vector<std::vector<double>> per_fold(folds);
  parallel_for(folds, jobs, [&](std::size_t f) {
    std::vector<std::size_t> tr, va;
    for (std::size_t i = 0; i < train.rows; ++i) (fold_of[i] == f ? va : tr).push_back(i);
    per_fold[f] = internal::fold_accuracies(family, r.points, seed, train.subset(tr),
                                            train.subset(va));
  });

  r.mean_accuracy.assign(r.points.size(), 0.0);
  for (std::size_t g = 0; g < r.points.size(); ++g) {
    for (std::size_t f = 0; f < folds; ++f) r.mean_accuracy[g] += per_fold[f][g];
    r.mean_accuracy[g] /= static_cast<double>(folds);
  }
  for (std::size_t g = 1; g < r.points.size(); ++g) {
    if (r.mean_accuracy[g] > r.mean_accuracy[r.best_index]) r.best_index = g;
  }
  r.best = ModelSpec{family, r.points[r.best_index], seed};
  return r;
}

}  // namespace anonkit::ml
