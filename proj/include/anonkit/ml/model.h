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

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/ml/encoder.h"
#include "anonkit/ml/ensemble.h"
#include "anonkit/ml/knn.h"
#include "anonkit/ml/tree.h"

namespace anonkit::ml {

enum class Family { kKnn, kTree, kRandomForest, kAdaBoost, kGradientBoosting };

// Short names used on the command line and in reports.
inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::kKnn: return "knn";
    case Family::kTree: return "tree";
    case Family::kRandomForest: return "rf";
    case Family::kAdaBoost: return "ab";
    case Family::kGradientBoosting: return "gb";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  if (s == "knn") return Family::kKnn;
  if (s == "tree") return Family::kTree;
  if (s == "rf" || s == "random_forest") return Family::kRandomForest;
  if (s == "ab" || s == "adaboost") return Family::kAdaBoost;
  if (s == "gb" || s == "gradient_boosting") return Family::kGradientBoosting;
  throw Error("unknown model family '" + std::string(s) + "'");
}

using Params = std::map<std::string, double>;
// Parameter name -> candidate values. Points are enumerated with the
// alphabetically first name outermost and the last name varying fastest,
// each list in its written order.
using ParamGrid = std::map<std::string, std::vector<double>>;

struct ModelSpec {
  Family family = Family::kKnn;
  Params params;
  std::uint64_t seed = 0;

  double param(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) {
      throw Error("model " + std::string(family_name(family)) + ": missing parameter '" +
                  name + "'");
    }
    return it->second;
  }
  int int_param(const std::string& name) const { return static_cast<int>(param(name)); }
};

inline std::vector<Params> expand_grid(const ParamGrid& grid) {
  std::vector<Params> points{{}};
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw Error("grid: parameter '" + name + "' has no values");
    std::vector<Params> next;
    for (const auto& p : points) {
      for (double v : values) {
        auto q = p;
        q[name] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

inline std::vector<double> int_range(int lo, int hi) {
  std::vector<double> out;
  for (int i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

// Hyper-parameter grids of the reference study.
inline ParamGrid default_grid(Family f) {
  switch (f) {
    case Family::kKnn: return {{"n_neighbors", int_range(3, 50)}};
    case Family::kTree: return {{"max_depth", int_range(2, 9)}};
    case Family::kRandomForest: return {{"max_depth", int_range(2, 9)}, {"n_estimators", {100}}};
    case Family::kAdaBoost:
      return {{"learning_rate", {0.01, 0.1, 0.5, 1}}, {"n_estimators", {50, 100, 150}}};
    case Family::kGradientBoosting:
      return {{"learning_rate", {0.01, 0.1, 0.5, 1}},
              {"max_depth", {2, 4, 6, 8, 10}},
              {"n_estimators", {50, 100, 150}}};
  }
  return {};
}

// Small grids for quick runs.
inline ParamGrid reduced_grid(Family f) {
  switch (f) {
    case Family::kKnn: return {{"n_neighbors", {5, 15, 30}}};
    case Family::kTree: return {{"max_depth", {4, 8}}};
    case Family::kRandomForest: return {{"max_depth", {4, 8}}, {"n_estimators", {100}}};
    case Family::kAdaBoost: return {{"learning_rate", {0.1, 1}}, {"n_estimators", {50}}};
    case Family::kGradientBoosting:
      return {{"learning_rate", {0.1}}, {"max_depth", {2, 4}}, {"n_estimators", {50}}};
  }
  return {};
}

class TrainedModel {
 public:
  using Impl = std::variant<KnnModel, DecisionTree, ForestModel, AdaBoostModel, GBoostModel>;

  TrainedModel(ModelSpec spec, Impl impl) : spec_(std::move(spec)), impl_(std::move(impl)) {}

  const ModelSpec& spec() const { return spec_; }
  Family family() const { return spec_.family; }
  const Impl& impl() const { return impl_; }

  // Score in [0, 1]; the predicted label is score >= 0.5.
  double predict_score(std::span<const double> x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, impl_);
  }

  std::vector<double> predict_scores(const LabeledMatrix& x) const {
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict_score(x.row(i));
    return out;
  }

  std::vector<int> predict_labels(const LabeledMatrix& x) const {
    std::vector<int> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict_score(x.row(i)) >= 0.5 ? 1 : 0;
    return out;
  }

 private:
  ModelSpec spec_;
  Impl impl_;
};

inline TrainedModel fit_model(const ModelSpec& spec, const LabeledMatrix& train, int jobs = 1) {
  switch (spec.family) {
    case Family::kKnn:
      return {spec, knn_fit(train, static_cast<std::size_t>(spec.int_param("n_neighbors")))};
    case Family::kTree:
      return {spec, tree_fit(train, spec.int_param("max_depth"))};
    case Family::kRandomForest: {
      ForestParams p;
      p.n_trees = spec.int_param("n_estimators");
      p.max_depth = spec.int_param("max_depth");
      p.seed = spec.seed;
      return {spec, forest_fit(train, p, jobs)};
    }
    case Family::kAdaBoost: {
      AdaBoostParams p;
      p.n_estimators = spec.int_param("n_estimators");
      p.learning_rate = spec.param("learning_rate");
      p.seed = spec.seed;
      return {spec, adaboost_fit(train, p)};
    }
    case Family::kGradientBoosting: {
      GBoostParams p;
      p.n_estimators = spec.int_param("n_estimators");
      p.learning_rate = spec.param("learning_rate");
      p.max_depth = spec.int_param("max_depth");
      p.seed = spec.seed;
      return {spec, gboost_fit(train, p)};
    }
  }
  throw Error("fit_model: unknown family");
}

}  // namespace anonkit::ml
