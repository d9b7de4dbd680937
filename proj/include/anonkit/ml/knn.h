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
#include <cstdint>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/ml/encoder.h"

namespace anonkit::ml {

// k-nearest-neighbour scorer under Minkowski distance with p = 2. Rows are
// kept sparse; squared distances are summed over the union of non-zeros,
// which is exactly the dense sum. Distance ties go to the lower training
// row index.
class KnnModel {
 public:
  KnnModel() = default;

  KnnModel(const LabeledMatrix& train, std::size_t neighbors)
      : neighbors_(neighbors), labels_(train.labels) {
    if (train.rows == 0) throw Error("knn: empty training set");
    if (neighbors < 1 || neighbors > train.rows) {
      throw Error("knn: neighbors must lie in [1, " + std::to_string(train.rows) + "]");
    }
    train_ = to_sparse(train);
  }

  std::size_t neighbors() const { return neighbors_; }

  // Training rows nearest to x, closest first, at most `count` of them.
  std::vector<std::uint32_t> nearest(std::span<const double> x, std::size_t count) const {
    const auto query = sparse_row(x);
    using Entry = std::pair<double, std::uint32_t>;
    std::priority_queue<Entry> heap;  // max-heap on (distance, index)
    for (std::size_t r = 0; r + 1 < train_.start.size(); ++r) {
      const double d = squared_distance(query, r);
      const Entry e{d, static_cast<std::uint32_t>(r)};
      if (heap.size() < count) {
        heap.push(e);
      } else if (e < heap.top()) {
        heap.pop();
        heap.push(e);
      }
    }
    std::vector<std::uint32_t> out(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
      out[i] = heap.top().second;
      heap.pop();
    }
    return out;
  }

  // Positive fraction among the first `k` entries of a nearest() list.
  double score_from(std::span<const std::uint32_t> nearest_rows, std::size_t k) const {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < k; ++i) pos += labels_[nearest_rows[i]] == 1;
    return static_cast<double>(pos) / static_cast<double>(k);
  }

  double predict(std::span<const double> x) const {
    return score_from(nearest(x, neighbors_), neighbors_);
  }

 private:
  struct SparseRows {
    std::vector<std::size_t> start;
    std::vector<std::uint32_t> index;
    std::vector<double> value;
  };
  using SparseRow = std::vector<std::pair<std::uint32_t, double>>;

  static SparseRows to_sparse(const LabeledMatrix& m) {
    SparseRows s;
    s.start.push_back(0);
    for (std::size_t r = 0; r < m.rows; ++r) {
      auto row = m.row(r);
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] != 0.0) {
          s.index.push_back(static_cast<std::uint32_t>(j));
          s.value.push_back(row[j]);
        }
      }
      s.start.push_back(s.index.size());
    }
    return s;
  }

  static SparseRow sparse_row(std::span<const double> x) {
    SparseRow out;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] != 0.0) out.emplace_back(static_cast<std::uint32_t>(j), x[j]);
    }
    return out;
  }

  double squared_distance(const SparseRow& q, std::size_t r) const {
    double d = 0.0;
    std::size_t a = 0;
    std::size_t b = train_.start[r];
    const std::size_t b_end = train_.start[r + 1];
    while (a < q.size() || b < b_end) {
      double diff;
      if (b >= b_end || (a < q.size() && q[a].first < train_.index[b])) {
        diff = q[a++].second;
      } else if (a >= q.size() || train_.index[b] < q[a].first) {
        diff = train_.value[b++];
      } else {
        diff = q[a++].second - train_.value[b++];
      }
      d += diff * diff;
    }
    return d;
  }

  std::size_t neighbors_ = 1;
  std::vector<int> labels_;
  SparseRows train_;
};

inline KnnModel knn_fit(const LabeledMatrix& train, std::size_t neighbors) {
  return KnnModel(train, neighbors);
}

inline std::vector<double> knn_predict(const KnnModel& model, const LabeledMatrix& x) {
  std::vector<double> scores(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) scores[i] = model.predict(x.row(i));
  return scores;
}

}  // namespace anonkit::ml
