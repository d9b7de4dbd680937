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

// Value generalization hierarchies.
//
// A hierarchy file has one semicolon-delimited row per raw value and no
// header; column j holds the level-j generalization, column 0 the raw value.
//
//   17;[15, 20);[10, 20);[0, 20);[0, 40);[0, 80);*
//
// Every raw value is listed explicitly (no interval rules), so numeric and
// categorical attributes share one code path.

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "anonkit/common.h"
#include "anonkit/data.h"

namespace anonkit {

inline constexpr std::string_view kSuppressed = "*";

class Hierarchy {
 public:
  Hierarchy() = default;

  // Height-0 hierarchy that accepts any value, for attributes that are
  // never generalized.
  static Hierarchy identity(std::string attribute) {
    Hierarchy h;
    h.attribute_ = std::move(attribute);
    h.open_identity_ = true;
    return h;
  }

  // paths: raw value -> [raw, level1, ..., level height]. All paths must have
  // equal length and start with their key.
  static Hierarchy from_paths(
      std::string attribute,
      std::unordered_map<std::string, std::vector<std::string>> paths) {
    Hierarchy h;
    h.attribute_ = std::move(attribute);
    bool first = true;
    for (const auto& [key, path] : paths) {
      if (path.empty() || path.front() != key) {
        throw Error("hierarchy '" + h.attribute_ + "': path for '" + key +
                    "' must start with the raw value");
      }
      if (first) {
        h.height_ = static_cast<int>(path.size()) - 1;
        first = false;
      } else if (static_cast<int>(path.size()) - 1 != h.height_) {
        throw Error("hierarchy '" + h.attribute_ + "': ragged paths");
      }
    }
    h.paths_ = std::move(paths);
    h.check_coarsening();
    return h;
  }

  const std::string& attribute() const { return attribute_; }
  int height() const { return height_; }
  bool is_identity() const { return open_identity_; }

  bool contains(const std::string& value) const {
    return open_identity_ || paths_.count(value) > 0;
  }

  const std::string& generalize(const std::string& value, int level) const {
    if (level < 0 || level > height_) {
      throw Error("hierarchy '" + attribute_ + "': level " +
                  std::to_string(level) + " outside [0, " +
                  std::to_string(height_) + "]");
    }
    if (open_identity_) return value;
    auto it = paths_.find(value);
    if (it == paths_.end()) {
      throw Error("hierarchy '" + attribute_ + "': unknown value '" + value +
                  "'");
    }
    return it->second[static_cast<std::size_t>(level)];
  }

  // Raw values in ascending order.
  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    out.reserve(paths_.size());
    for (const auto& [k, p] : paths_) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  // Two raw values that agree at level j must agree at every level above j,
  // otherwise coarsening the lattice could split an equivalence class.
  void check_coarsening() const {
    for (int j = 0; j < height_; ++j) {
      std::map<std::string, std::string> parent;
      for (const auto& [key, path] : paths_) {
        const auto& here = path[static_cast<std::size_t>(j)];
        const auto& up = path[static_cast<std::size_t>(j) + 1];
        auto [it, inserted] = parent.emplace(here, up);
        if (!inserted && it->second != up) {
          throw Error("hierarchy '" + attribute_ + "': level-" +
                      std::to_string(j) + " value '" + here +
                      "' generalizes to both '" + it->second + "' and '" +
                      up + "'");
        }
      }
    }
  }

  std::string attribute_;
  int height_ = 0;
  bool open_identity_ = false;
  std::unordered_map<std::string, std::vector<std::string>> paths_;
};

inline Hierarchy load_hierarchy(std::istream& in, const std::string& attribute) {
  std::unordered_map<std::string, std::vector<std::string>> paths;
  std::string line;
  std::size_t width = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_delimited(line, ';');
    if (row == 0) {
      width = cells.size();
    } else if (cells.size() != width) {
      throw Error("hierarchy '" + attribute + "': ragged row " +
                  std::to_string(row) + " (expected " + std::to_string(width) +
                  " columns, got " + std::to_string(cells.size()) + ")");
    }
    auto [it, inserted] = paths.emplace(cells.front(), cells);
    if (!inserted && it->second != cells) {
      throw Error("hierarchy '" + attribute + "': conflicting paths for '" +
                  cells.front() + "'");
    }
    ++row;
  }
  if (paths.empty()) throw Error("hierarchy '" + attribute + "': no rows");
  return Hierarchy::from_paths(attribute, std::move(paths));
}

inline Hierarchy load_hierarchy_file(const std::string& path,
                                     const std::string& attribute) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open hierarchy file '" + path + "'");
  return load_hierarchy(in, attribute);
}

inline std::string generalize_value(const Hierarchy& h, const std::string& value,
                                    int level) {
  return h.generalize(value, level);
}

// Distinct values of the attribute that the hierarchy does not cover,
// ascending.
inline std::vector<std::string> validate_hierarchy(const Hierarchy& h,
                                                   const Dataset& d,
                                                   const std::string& attribute) {
  const auto col = d.schema.index_of(attribute);
  std::set<std::string> uncovered;
  for (const auto& row : d.rows) {
    if (!h.contains(row[col])) uncovered.insert(row[col]);
  }
  return {uncovered.begin(), uncovered.end()};
}

using HierarchySet = std::map<std::string, Hierarchy>;

// One hierarchy per quasi-identifier: <dir>/<attribute>.csv when present,
// otherwise the identity.
inline HierarchySet load_hierarchies(const std::string& dir, const Schema& schema) {
  HierarchySet out;
  for (auto i : schema.quasi_identifier_indices()) {
    const auto& name = schema.attributes[i].name;
    const auto path = std::filesystem::path(dir) / (name + ".csv");
    if (std::filesystem::exists(path)) {
      out.emplace(name, load_hierarchy_file(path.string(), name));
    } else {
      out.emplace(name, Hierarchy::identity(name));
    }
  }
  return out;
}

// Hierarchy heights in quasi-identifier schema order; attributes missing
// from the set count as height 0.
inline std::vector<int> hierarchy_heights(const Schema& schema,
                                          const HierarchySet& hs) {
  std::vector<int> heights;
  for (auto i : schema.quasi_identifier_indices()) {
    auto it = hs.find(schema.attributes[i].name);
    heights.push_back(it == hs.end() ? 0 : it->second.height());
  }
  return heights;
}

// Throws listing the first uncovered values of every quasi-identifier.
inline void check_coverage(const Dataset& d, const HierarchySet& hs) {
  std::string msg;
  for (auto i : d.schema.quasi_identifier_indices()) {
    const auto& name = d.schema.attributes[i].name;
    auto it = hs.find(name);
    if (it == hs.end()) continue;
    auto missing = validate_hierarchy(it->second, d, name);
    if (missing.empty()) continue;
    msg += " " + name + ":";
    for (std::size_t j = 0; j < missing.size() && j < 5; ++j) {
      msg += " '" + missing[j] + "'";
    }
    if (missing.size() > 5) msg += " ...";
  }
  if (!msg.empty()) throw Error("hierarchies do not cover values;" + msg);
}

}  // namespace anonkit
