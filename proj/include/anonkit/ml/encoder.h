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
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/data.h"

namespace anonkit::ml {

// Dense row-major feature matrix with binary labels.
struct LabeledMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * cols, cols};
  }
  double at(std::size_t i, std::size_t j) const { return features[i * cols + j]; }

  LabeledMatrix subset(std::span<const std::size_t> indices) const {
    LabeledMatrix out;
    out.rows = indices.size();
    out.cols = cols;
    out.feature_names = feature_names;
    out.features.reserve(indices.size() * cols);
    out.labels.reserve(indices.size());
    for (auto i : indices) {
      auto r = row(i);
      out.features.insert(out.features.end(), r.begin(), r.end());
      out.labels.push_back(labels[i]);
    }
    return out;
  }
};

inline LabeledMatrix make_matrix(std::vector<std::vector<double>> rows,
                                 std::vector<int> labels) {
  LabeledMatrix m;
  m.rows = rows.size();
  m.cols = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != m.cols) throw Error("make_matrix: ragged rows");
    m.features.insert(m.features.end(), r.begin(), r.end());
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error("make_matrix: labels must be 0 or 1");
  }
  if (labels.size() != m.rows) throw Error("make_matrix: label count mismatch");
  m.labels = std::move(labels);
  for (std::size_t j = 0; j < m.cols; ++j) m.feature_names.push_back("x" + std::to_string(j));
  return m;
}

enum class Encoding { kOneHot, kOrdinal };

struct AttributeEncoding {
  std::size_t column = 0;  // schema position
  std::string name;
  Encoding encoding = Encoding::kOneHot;
  std::vector<std::string> vocabulary;  // ascending
};

struct EncoderState {
  std::vector<AttributeEncoding> attributes;
  std::size_t label_column = 0;
  std::string positive_label;

  std::size_t width() const {
    std::size_t w = 0;
    for (const auto& a : attributes) {
      w += a.encoding == Encoding::kOneHot ? a.vocabulary.size() : 1;
    }
    return w;
  }
};

// Learns per-quasi-identifier vocabularies from the training table. Only
// quasi-identifiers become features; the sensitive column is the label.
inline EncoderState fit_encoder(const Dataset& train,
                                Encoding encoding = Encoding::kOneHot) {
  if (train.rows.empty()) throw Error("fit_encoder: empty training set");
  if (!train.schema.positive_label) {
    throw Error("fit_encoder: schema declares no positive_label");
  }
  EncoderState e;
  e.label_column = train.schema.sensitive_index();
  e.positive_label = *train.schema.positive_label;
  for (auto c : train.schema.quasi_identifier_indices()) {
    std::set<std::string> vocab;
    for (const auto& row : train.rows) vocab.insert(row[c]);
    e.attributes.push_back(
        {c, train.schema.attributes[c].name, encoding, {vocab.begin(), vocab.end()}});
  }
  if (e.attributes.empty()) throw Error("fit_encoder: no quasi-identifier features");
  return e;
}

// Unseen categories become an all-zero one-hot block (ordinal: -1).
inline LabeledMatrix encode(const EncoderState& e, const Dataset& d) {
  LabeledMatrix m;
  m.rows = d.rows.size();
  m.cols = e.width();
  for (const auto& a : e.attributes) {
    if (a.encoding == Encoding::kOneHot) {
      for (const auto& v : a.vocabulary) m.feature_names.push_back(a.name + "=" + v);
    } else {
      m.feature_names.push_back(a.name);
    }
  }
  m.features.assign(m.rows * m.cols, 0.0);
  m.labels.reserve(m.rows);
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    const auto& row = d.rows[r];
    if (row.size() <= e.label_column) throw Error("encode: row shorter than schema");
    std::size_t offset = 0;
    for (const auto& a : e.attributes) {
      auto it = std::lower_bound(a.vocabulary.begin(), a.vocabulary.end(), row[a.column]);
      const bool known = it != a.vocabulary.end() && *it == row[a.column];
      const auto pos = static_cast<std::size_t>(it - a.vocabulary.begin());
      if (a.encoding == Encoding::kOneHot) {
        if (known) m.features[r * m.cols + offset + pos] = 1.0;
        offset += a.vocabulary.size();
      } else {
        m.features[r * m.cols + offset] = known ? static_cast<double>(pos) : -1.0;
        offset += 1;
      }
    }
    m.labels.push_back(row[e.label_column] == e.positive_label ? 1 : 0);
  }
  return m;
}

}  // namespace anonkit::ml
