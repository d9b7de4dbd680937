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

// Tree ensembles: random forest, discrete AdaBoost and log-loss gradient
// boosting. All three fit on collapsed (deduplicated, weighted) rows.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/ml/encoder.h"
#include "anonkit/ml/tree.h"

namespace anonkit::ml {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Random forest

struct ForestParams {
  int n_trees = 100;
  int max_depth = 2;
  std::uint64_t seed = 0;
  bool bootstrap = true;
  // 0 means ceil(sqrt(feature count)).
  std::size_t max_features = 0;
};

class ForestModel {
 public:
  ForestModel() = default;
  explicit ForestModel(std::vector<DecisionTree> trees) : trees_(std::move(trees)) {}

  // Mean of the trees' positive fractions.
  double predict(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict(x);
    return s / static_cast<double>(trees_.size());
  }

  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
};

// Tree i draws its bootstrap sample and split features from a generator
// seeded with seed + i, so trees are independent of fitting order.
inline ForestModel forest_fit(const LabeledMatrix& train, const ForestParams& params,
                              int jobs = 1) {
  if (train.rows == 0) throw Error("forest_fit: empty training set");
  if (params.n_trees < 1) throw Error("forest_fit: n_trees must be >= 1");
  if (params.max_depth < 1) throw Error("forest_fit: max_depth must be >= 1");
  const auto collapsed = collapse_rows(train);
  const auto binned = bin_features(collapsed.unique);
  const auto target = label_targets(collapsed.unique);
  const std::size_t max_features =
      params.max_features > 0
          ? params.max_features
          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(train.cols))));

  std::vector<DecisionTree> trees(static_cast<std::size_t>(params.n_trees));
  parallel_for(trees.size(), jobs, [&](std::size_t i) {
    Rng rng(params.seed + i);
    std::vector<double> weight;
    if (params.bootstrap) {
      weight.assign(collapsed.unique.rows, 0.0);
      for (std::size_t draw = 0; draw < train.rows; ++draw) {
        weight[collapsed.unique_of[uniform_below(rng, train.rows)]] += 1.0;
      }
    } else {
      weight = collapsed.counts;
    }
    TreeBuilder builder(binned, weight, target, {params.max_depth, max_features},
                        positive_fraction_leaf(weight, target), &rng);
    trees[i] = builder.build();
  });
  return ForestModel(std::move(trees));
}

// ---------------------------------------------------------------------------
// AdaBoost

struct AdaBoostParams {
  int n_estimators = 50;
  double learning_rate = 1.0;
  std::uint64_t seed = 0;  // stumps are deterministic; kept for a uniform spec
};

inline constexpr double kMaxStageWeight = 1e3;

class AdaBoostModel {
 public:
  struct Stage {
    DecisionTree stump;
    double alpha = 0.0;
  };

  AdaBoostModel() = default;
  explicit AdaBoostModel(std::vector<Stage> stages) : stages_(std::move(stages)) {}

  // Additive margin of the first `stages` stumps, each voting +-1.
  double margin(std::span<const double> x, std::size_t stages) const {
    double f = 0.0;
    stages = std::min(stages, stages_.size());
    for (std::size_t i = 0; i < stages; ++i) {
      f += stages_[i].alpha * (stages_[i].stump.predict(x) >= 0.5 ? 1.0 : -1.0);
    }
    return f;
  }

  double predict(std::span<const double> x) const { return sigmoid(margin(x, stages_.size())); }
  double predict(std::span<const double> x, std::size_t stages) const {
    return sigmoid(margin(x, stages));
  }

  const std::vector<Stage>& stages() const { return stages_; }

 private:
  std::vector<Stage> stages_;
};

// Discrete two-class AdaBoost with depth-1 trees. Stage weight is
// learning_rate * ln((1 - err) / err); misclassified rows are scaled by
// exp(alpha) and weights renormalized. Stops early when err >= 0.5 (stage
// dropped) or err == 0 (stage kept with alpha capped at kMaxStageWeight).
inline AdaBoostModel adaboost_fit(const LabeledMatrix& train, const AdaBoostParams& params) {
  if (train.rows == 0) throw Error("adaboost_fit: empty training set");
  if (params.n_estimators < 1) throw Error("adaboost_fit: n_estimators must be >= 1");
  if (!(params.learning_rate > 0.0)) throw Error("adaboost_fit: learning_rate must be > 0");
  const auto collapsed = collapse_rows(train);
  const auto binned = bin_features(collapsed.unique);
  const auto target = label_targets(collapsed.unique);
  const auto n = collapsed.unique.rows;

  std::vector<double> weight(n);
  for (std::size_t r = 0; r < n; ++r) {
    weight[r] = collapsed.counts[r] / static_cast<double>(train.rows);
  }
  std::vector<AdaBoostModel::Stage> stages;
  std::vector<char> miss(n);
  for (int m = 0; m < params.n_estimators; ++m) {
    TreeBuilder builder(binned, weight, target, {1, 0}, positive_fraction_leaf(weight, target));
    auto stump = builder.build();
    double err = 0.0, total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const int vote = stump.predict(collapsed.unique.row(r)) >= 0.5 ? 1 : 0;
      miss[r] = vote != collapsed.unique.labels[r];
      total += weight[r];
      if (miss[r]) err += weight[r];
    }
    err /= total;
    if (err >= 0.5) break;
    if (err <= 0.0) {
      stages.push_back({std::move(stump), kMaxStageWeight});
      break;
    }
    const double alpha =
        std::min(params.learning_rate * std::log((1.0 - err) / err), kMaxStageWeight);
    stages.push_back({std::move(stump), alpha});
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (miss[r]) weight[r] *= std::exp(alpha);
      norm += weight[r];
    }
    for (auto& w : weight) w /= norm;
  }
  return AdaBoostModel(std::move(stages));
}

// ---------------------------------------------------------------------------
// Gradient boosting

struct GBoostParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  std::uint64_t seed = 0;  // no row or feature subsampling, kept for a uniform spec
};

class GBoostModel {
 public:
  GBoostModel() = default;
  GBoostModel(double init, double learning_rate, std::vector<DecisionTree> trees,
              std::vector<double> train_loss)
      : init_(init), learning_rate_(learning_rate), trees_(std::move(trees)),
        train_loss_(std::move(train_loss)) {}

  double raw(std::span<const double> x, std::size_t stages) const {
    double f = init_;
    stages = std::min(stages, trees_.size());
    for (std::size_t i = 0; i < stages; ++i) f += learning_rate_ * trees_[i].predict(x);
    return f;
  }

  double predict(std::span<const double> x) const { return sigmoid(raw(x, trees_.size())); }
  double predict(std::span<const double> x, std::size_t stages) const {
    return sigmoid(raw(x, stages));
  }

  double init() const { return init_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  // Mean training log-loss after 0, 1, ..., n stages.
  const std::vector<double>& train_loss() const { return train_loss_; }

 private:
  double init_ = 0.0;
  double learning_rate_ = 0.1;
  std::vector<DecisionTree> trees_;
  std::vector<double> train_loss_;
};

// Binary log-loss boosting. F starts at the log-odds of the positive rate;
// each stage fits a squared-error tree to the residuals y - sigmoid(F) and
// sets every leaf to one Newton step, sum(r) / sum(p (1 - p)).
inline GBoostModel gboost_fit(const LabeledMatrix& train, const GBoostParams& params) {
  if (train.rows == 0) throw Error("gboost_fit: empty training set");
  if (params.n_estimators < 0) throw Error("gboost_fit: n_estimators must be >= 0");
  if (params.max_depth < 1) throw Error("gboost_fit: max_depth must be >= 1");
  if (!(params.learning_rate > 0.0)) throw Error("gboost_fit: learning_rate must be > 0");
  const auto collapsed = collapse_rows(train);
  const auto binned = bin_features(collapsed.unique);
  const auto n = collapsed.unique.rows;
  const auto& w = collapsed.counts;

  double pos = 0.0;
  for (std::size_t r = 0; r < n; ++r) pos += w[r] * collapsed.unique.labels[r];
  const double total = static_cast<double>(train.rows);
  if (pos <= 0.0 || pos >= total) {
    throw Error("gboost_fit: training labels are all one class");
  }
  const double init = std::log(pos / (total - pos));

  std::vector<double> f(n, init), prob(n), residual(n);
  auto refresh = [&]() {
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      prob[r] = sigmoid(f[r]);
      const int y = collapsed.unique.labels[r];
      residual[r] = y - prob[r];
      // log(1 + e^F) - y F, computed stably.
      const double softplus = f[r] > 0 ? f[r] + std::log1p(std::exp(-f[r]))
                                       : std::log1p(std::exp(f[r]));
      loss += w[r] * (softplus - y * f[r]);
    }
    return loss / total;
  };

  std::vector<double> losses{refresh()};
  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_estimators));
  auto newton_leaf = [&](std::span<const std::uint32_t> rows) {
    double num = 0.0, den = 0.0;
    for (auto r : rows) {
      num += w[r] * residual[r];
      den += w[r] * prob[r] * (1.0 - prob[r]);
    }
    return den < 1e-150 ? 0.0 : num / den;
  };
  for (int m = 0; m < params.n_estimators; ++m) {
    TreeBuilder builder(binned, w, residual, {params.max_depth, 0}, newton_leaf);
    auto tree = builder.build();
    for (std::size_t r = 0; r < n; ++r) {
      f[r] += params.learning_rate * tree.predict(collapsed.unique.row(r));
    }
    trees.push_back(std::move(tree));
    losses.push_back(refresh());
  }
  return GBoostModel(init, params.learning_rate, std::move(trees), std::move(losses));
}

}  // namespace anonkit::ml
