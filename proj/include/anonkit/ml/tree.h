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

// Binary CART trees on weighted samples.
//
// One builder serves classification (Gini) and regression (squared error).
// For 0/1 targets the weighted Gini decrease is exactly twice the
// squared-error decrease, so both rank splits with
//   gain = S_L^2 / W_L + S_R^2 / W_R - S^2 / W
// where W is the weight and S the weighted target sum of a node.
//
// Features are pre-binned on their sorted distinct training values; a split
// after bin b sends bins <= b left with threshold halfway between the
// largest value present on the left and the smallest present on the right.
// Histograms only touch each row's non-default bins (one-hot data has one
// non-default bin per attribute), the default bin is filled in by
// subtraction from the node totals.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/ml/encoder.h"

namespace anonkit::ml {

struct BinnedFeatures {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<double>> values;  // sorted distinct values per feature
  std::vector<std::uint32_t> slot_offset;   // first histogram slot per feature
  std::uint32_t slot_count = 0;
  std::vector<std::uint32_t> bins;          // column-major, bins[f * rows + r]
  std::vector<std::uint32_t> default_bin;   // most frequent bin per feature
  // CSR of (row -> histogram slots of non-default bins).
  std::vector<std::uint32_t> row_start;
  std::vector<std::uint32_t> row_slots;

  std::uint32_t bin(std::size_t f, std::size_t r) const { return bins[f * rows + r]; }
};

inline BinnedFeatures bin_features(const LabeledMatrix& x) {
  BinnedFeatures b;
  b.rows = x.rows;
  b.cols = x.cols;
  b.values.resize(x.cols);
  b.slot_offset.resize(x.cols);
  b.bins.resize(x.rows * x.cols);
  b.default_bin.resize(x.cols);
  for (std::size_t f = 0; f < x.cols; ++f) {
    auto& vals = b.values[f];
    vals.reserve(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) vals.push_back(x.at(r, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    b.slot_offset[f] = b.slot_count;
    b.slot_count += static_cast<std::uint32_t>(vals.size());
    std::vector<std::size_t> freq(vals.size(), 0);
    for (std::size_t r = 0; r < x.rows; ++r) {
      const auto pos = static_cast<std::uint32_t>(
          std::lower_bound(vals.begin(), vals.end(), x.at(r, f)) - vals.begin());
      b.bins[f * x.rows + r] = pos;
      ++freq[pos];
    }
    b.default_bin[f] = static_cast<std::uint32_t>(
        std::max_element(freq.begin(), freq.end()) - freq.begin());
  }
  b.row_start.assign(x.rows + 1, 0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t f = 0; f < x.cols; ++f) {
      const auto bin = b.bin(f, r);
      if (bin != b.default_bin[f]) b.row_slots.push_back(b.slot_offset[f] + bin);
    }
    b.row_start[r + 1] = static_cast<std::uint32_t>(b.row_slots.size());
  }
  return b;
}

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> x) const {
    int i = 0;
    while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
      const auto& n = nodes_[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(i)].value;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }

  int depth() const { return depth_from(0); }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(
        nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
  }

 private:
  int depth_from(int i) const {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.feature < 0) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }

  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  int max_depth = 1;
  // Features drawn per split; 0 considers all. Drawing skips features that
  // are constant within the node so the quota counts usable candidates.
  std::size_t max_features = 0;
};

using LeafValueFn = std::function<double(std::span<const std::uint32_t>)>;

class TreeBuilder {
 public:
  // weight[r] == 0 keeps row r out of the tree entirely.
  TreeBuilder(const BinnedFeatures& x, std::span<const double> weight,
              std::span<const double> target, TreeParams params, LeafValueFn leaf,
              Rng* rng = nullptr)
      : x_(x), weight_(weight), target_(target), params_(params),
        leaf_(std::move(leaf)), rng_(rng) {
    if (params_.max_depth < 0) throw Error("tree: max_depth must be >= 0");
    if (params_.max_features > 0 && rng_ == nullptr) {
      throw Error("tree: feature sampling needs a generator");
    }
  }

  DecisionTree build() {
    std::vector<std::uint32_t> rows;
    for (std::size_t r = 0; r < x_.rows; ++r) {
      if (weight_[r] > 0.0) rows.push_back(static_cast<std::uint32_t>(r));
    }
    if (rows.empty()) throw Error("tree: no training rows");
    nodes_.clear();
    grow(rows, 0, rows.size(), 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  struct Split {
    int feature = -1;
    std::uint32_t bin = 0;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int grow(std::vector<std::uint32_t>& rows, std::size_t begin, std::size_t end,
           int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    std::span<const std::uint32_t> mine(rows.data() + begin, end - begin);
    nodes_[static_cast<std::size_t>(id)].value = leaf_(mine);

    double w = 0.0, s = 0.0, ss = 0.0;
    double lo = target_[mine.front()], hi = lo;
    for (auto r : mine) {
      w += weight_[r];
      s += weight_[r] * target_[r];
      ss += weight_[r] * target_[r] * target_[r];
      lo = std::min(lo, target_[r]);
      hi = std::max(hi, target_[r]);
    }
    if (depth >= params_.max_depth || lo == hi || mine.size() < 2) return id;

    const Split split = best_split(mine, w, s, ss);
    if (split.feature < 0) return id;

    const auto f = static_cast<std::size_t>(split.feature);
    auto mid = std::stable_partition(
        rows.begin() + static_cast<std::ptrdiff_t>(begin),
        rows.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::uint32_t r) { return x_.bin(f, r) <= split.bin; });
    const auto cut = static_cast<std::size_t>(mid - rows.begin());

    const int left = grow(rows, begin, cut, depth + 1);
    const int right = grow(rows, cut, end, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  std::vector<std::size_t> candidate_features(const std::vector<double>& hist_w,
                                              double total_w) {
    auto usable = [&](std::size_t f) {
      const auto begin = x_.slot_offset[f];
      const auto end = begin + static_cast<std::uint32_t>(x_.values[f].size());
      for (auto slot = begin; slot < end; ++slot) {
        if (hist_w[slot] > 0.0) return hist_w[slot] < total_w;
      }
      return false;
    };
    std::vector<std::size_t> out;
    if (params_.max_features == 0 || params_.max_features >= x_.cols) {
      for (std::size_t f = 0; f < x_.cols; ++f) {
        if (usable(f)) out.push_back(f);
      }
      return out;
    }
    std::vector<std::size_t> order(x_.cols);
    std::iota(order.begin(), order.end(), 0);
    fisher_yates(order, *rng_);
    for (auto f : order) {
      if (out.size() >= params_.max_features) break;
      if (usable(f)) out.push_back(f);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  Split best_split(std::span<const std::uint32_t> rows, double w, double s, double ss) {
    std::vector<double> hist_w(x_.slot_count, 0.0), hist_s(x_.slot_count, 0.0);
    for (auto r : rows) {
      const double rw = weight_[r], rs = weight_[r] * target_[r];
      for (auto k = x_.row_start[r]; k < x_.row_start[r + 1]; ++k) {
        hist_w[x_.row_slots[k]] += rw;
        hist_s[x_.row_slots[k]] += rs;
      }
    }
    for (std::size_t f = 0; f < x_.cols; ++f) {
      const auto begin = x_.slot_offset[f];
      const auto end = begin + static_cast<std::uint32_t>(x_.values[f].size());
      const auto def = begin + x_.default_bin[f];
      double ow = 0.0, os = 0.0;
      for (auto slot = begin; slot < end; ++slot) {
        if (slot == def) continue;
        ow += hist_w[slot];
        os += hist_s[slot];
      }
      hist_w[def] = std::max(0.0, w - ow);
      hist_s[def] = s - os;
      // Rounding can leave crumbs in a default bin no row falls into.
      if (hist_w[def] <= 1e-12 * w) hist_w[def] = 0.0, hist_s[def] = 0.0;
    }

    const double parent = s * s / w;
    const double min_gain = 1e-10 * std::max(ss, 1e-300);
    Split best;
    best.gain = min_gain;
    for (auto f : candidate_features(hist_w, w)) {
      const auto begin = x_.slot_offset[f];
      const auto nbins = static_cast<std::uint32_t>(x_.values[f].size());
      double lw = 0.0, ls = 0.0;
      for (std::uint32_t b = 0; b + 1 < nbins; ++b) {
        const auto slot = begin + b;
        if (hist_w[slot] <= 0.0) continue;
        lw += hist_w[slot];
        ls += hist_s[slot];
        const double rw = w - lw;
        if (rw <= 1e-12 * w) break;
        const double rs = s - ls;
        const double gain = ls * ls / lw + rs * rs / rw - parent;
        if (gain > best.gain + 1e-10 * std::abs(best.gain)) {
          std::uint32_t next = b + 1;
          while (next < nbins && hist_w[begin + next] <= 0.0) ++next;
          if (next >= nbins) break;
          best.feature = static_cast<int>(f);
          best.bin = b;
          best.gain = gain;
          best.threshold = (x_.values[f][b] + x_.values[f][next]) / 2.0;
        }
      }
    }
    return best;
  }

  const BinnedFeatures& x_;
  std::span<const double> weight_;
  std::span<const double> target_;
  TreeParams params_;
  LeafValueFn leaf_;
  Rng* rng_;
  std::vector<TreeNode> nodes_;
};

// Weighted positive fraction of the rows.
inline LeafValueFn positive_fraction_leaf(std::span<const double> weight,
                                          std::span<const double> target) {
  return [weight, target](std::span<const std::uint32_t> rows) {
    double w = 0.0, s = 0.0;
    for (auto r : rows) {
      w += weight[r];
      s += weight[r] * target[r];
    }
    return w > 0.0 ? s / w : 0.0;
  };
}

// Identical (feature row, label) pairs collapsed into one weighted row. Tree
// statistics are sums over rows, so fitting on the collapsed table with the
// multiplicities as weights grows the same tree.
struct CollapsedRows {
  LabeledMatrix unique;
  std::vector<double> counts;
  std::vector<std::uint32_t> unique_of;  // source row -> unique row
};

inline CollapsedRows collapse_rows(const LabeledMatrix& x) {
  CollapsedRows c;
  c.unique.cols = x.cols;
  c.unique.feature_names = x.feature_names;
  c.unique_of.resize(x.rows);
  std::map<std::pair<std::vector<double>, int>, std::uint32_t> seen;
  for (std::size_t r = 0; r < x.rows; ++r) {
    auto row = x.row(r);
    std::pair<std::vector<double>, int> key{{row.begin(), row.end()}, x.labels[r]};
    auto [it, inserted] = seen.emplace(std::move(key), static_cast<std::uint32_t>(c.unique.rows));
    if (inserted) {
      c.unique.features.insert(c.unique.features.end(), row.begin(), row.end());
      c.unique.labels.push_back(x.labels[r]);
      c.counts.push_back(0.0);
      ++c.unique.rows;
    }
    c.unique_of[r] = it->second;
    c.counts[it->second] += 1.0;
  }
  return c;
}

inline std::vector<double> label_targets(const LabeledMatrix& x) {
  return {x.labels.begin(), x.labels.end()};
}

// Single Gini CART tree; leaves score the positive fraction. Gain ties go
// to the lowest feature index, then the lowest threshold.
inline DecisionTree tree_fit(const LabeledMatrix& train, int max_depth) {
  if (train.rows == 0) throw Error("tree_fit: empty training set");
  if (max_depth < 1) throw Error("tree_fit: max_depth must be >= 1");
  const auto collapsed = collapse_rows(train);
  const auto binned = bin_features(collapsed.unique);
  const auto target = label_targets(collapsed.unique);
  TreeBuilder builder(binned, collapsed.counts, target, {max_depth, 0},
                      positive_fraction_leaf(collapsed.counts, target));
  return builder.build();
}

}  // namespace anonkit::ml
