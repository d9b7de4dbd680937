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

// Tabular datasets with an attribute-role schema.
//
// Dataset files are comma-delimited with one header row. Cells are trimmed of
// surrounding whitespace; a cell that itself contains a comma or a double
// quote is written quoted ("[20, 25)" style generalized intervals need this).
// Missing source values stay as the literal "?" token.
//
// Schema files are JSON:
//
//   {
//     "positive_label": ">50K",
//     "attributes": [
//       {"name": "age", "role": "quasi_identifier", "kind": "numeric_ordinal"},
//       {"name": "salary-class", "role": "sensitive", "kind": "categorical"}
//     ]
//   }
//
// role is one of identifier, quasi_identifier, sensitive, insensitive; kind is
// categorical (default) or numeric_ordinal. positive_label is only needed by
// the classification harness.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "anonkit/common.h"
#include "json.hpp"

namespace anonkit {

enum class Role { kIdentifier, kQuasiIdentifier, kSensitive, kInsensitive };
enum class Kind { kCategorical, kNumericOrdinal };

inline std::string_view to_string(Role role) {
  switch (role) {
    case Role::kIdentifier: return "identifier";
    case Role::kQuasiIdentifier: return "quasi_identifier";
    case Role::kSensitive: return "sensitive";
    case Role::kInsensitive: return "insensitive";
  }
  return "?";
}

inline std::string_view to_string(Kind kind) {
  return kind == Kind::kCategorical ? "categorical" : "numeric_ordinal";
}

inline Role parse_role(std::string_view s) {
  if (s == "identifier") return Role::kIdentifier;
  if (s == "quasi_identifier") return Role::kQuasiIdentifier;
  if (s == "sensitive") return Role::kSensitive;
  if (s == "insensitive") return Role::kInsensitive;
  throw Error("unknown attribute role '" + std::string(s) + "'");
}

inline Kind parse_kind(std::string_view s) {
  if (s == "categorical") return Kind::kCategorical;
  if (s == "numeric_ordinal") return Kind::kNumericOrdinal;
  throw Error("unknown attribute kind '" + std::string(s) + "'");
}

struct AttributeSchema {
  std::string name;
  Role role = Role::kInsensitive;
  Kind kind = Kind::kCategorical;

  bool operator==(const AttributeSchema&) const = default;
};

struct Schema {
  std::vector<AttributeSchema> attributes;
  // Label value mapped to 1 by the classifier encoder.
  std::optional<std::string> positive_label;

  bool operator==(const Schema&) const = default;

  std::size_t size() const { return attributes.size(); }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      if (attributes[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::size_t index_of(std::string_view name) const {
    auto i = find(name);
    if (!i) throw Error("no attribute named '" + std::string(name) + "'");
    return *i;
  }

  std::size_t sensitive_index() const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      if (attributes[i].role == Role::kSensitive) return i;
    }
    throw Error("schema has no sensitive attribute");
  }

  std::vector<std::size_t> quasi_identifier_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      if (attributes[i].role == Role::kQuasiIdentifier) out.push_back(i);
    }
    return out;
  }
};

// Unique names and exactly one sensitive attribute.
inline void validate_schema(const Schema& schema) {
  std::set<std::string> names;
  std::size_t sensitive = 0;
  for (const auto& a : schema.attributes) {
    if (a.name.empty()) throw Error("schema: empty attribute name");
    if (!names.insert(a.name).second) {
      throw Error("schema: duplicate attribute name '" + a.name + "'");
    }
    if (a.role == Role::kSensitive) ++sensitive;
  }
  if (sensitive != 1) {
    throw Error("schema: expected exactly one sensitive attribute, found " +
                std::to_string(sensitive));
  }
}

inline Schema parse_schema(const nlohmann::json& doc) {
  Schema schema;
  try {
    for (const auto& a : doc.at("attributes")) {
      AttributeSchema attr;
      attr.name = a.at("name").get<std::string>();
      attr.role = parse_role(a.at("role").get<std::string>());
      attr.kind = parse_kind(a.value("kind", std::string("categorical")));
      schema.attributes.push_back(std::move(attr));
    }
    if (doc.contains("positive_label")) {
      schema.positive_label = doc.at("positive_label").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("schema: ") + e.what());
  }
  validate_schema(schema);
  return schema;
}

inline Schema load_schema(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("schema: ") + e.what());
  }
  return parse_schema(doc);
}

inline Schema load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open schema file '" + path + "'");
  return load_schema(in);
}

inline nlohmann::ordered_json schema_to_json(const Schema& schema) {
  nlohmann::ordered_json doc;
  if (schema.positive_label) doc["positive_label"] = *schema.positive_label;
  doc["attributes"] = nlohmann::ordered_json::array();
  for (const auto& a : schema.attributes) {
    doc["attributes"].push_back({{"name", a.name},
                                 {"role", std::string(to_string(a.role))},
                                 {"kind", std::string(to_string(a.kind))}});
  }
  return doc;
}

using Row = std::vector<std::string>;

struct Dataset {
  Schema schema;
  std::vector<Row> rows;

  std::size_t row_count() const { return rows.size(); }
  std::size_t column_count() const { return schema.size(); }

  bool operator==(const Dataset&) const = default;

  // Rows at the given indices, in the given order.
  Dataset subset(const std::vector<std::size_t>& indices) const {
    Dataset out{schema, {}};
    out.rows.reserve(indices.size());
    for (auto i : indices) out.rows.push_back(rows.at(i));
    return out;
  }
};

// Splits one delimited line. Double-quoted fields may contain the delimiter;
// "" inside quotes is a literal quote. Unquoted cells are trimmed.
inline std::vector<std::string> split_delimited(std::string_view line,
                                                char delim) {
  std::vector<std::string> cells;
  std::size_t i = 0;
  while (true) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::string cell;
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size()) throw Error("unterminated quoted cell");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cell.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        cell.push_back(line[i++]);
      }
      const auto next = line.find(delim, i);
      if (!trim(line.substr(i, next == std::string_view::npos
                                   ? std::string_view::npos
                                   : next - i))
               .empty()) {
        throw Error("unexpected text after quoted cell");
      }
      cells.push_back(std::move(cell));
      if (next == std::string_view::npos) break;
      i = next + 1;
    } else {
      const auto next = line.find(delim, i);
      cells.emplace_back(trim(line.substr(
          i, next == std::string_view::npos ? std::string_view::npos
                                            : next - i)));
      if (next == std::string_view::npos) break;
      i = next + 1;
    }
  }
  return cells;
}

inline std::string quote_cell(const std::string& cell, char delim) {
  if (cell.find(delim) == std::string::npos &&
      cell.find('"') == std::string::npos) {
    return cell;
  }
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline bool parses_as_integer(std::string_view s) {
  long long value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end && !s.empty();
}

struct LoadOptions {
  // Generalized tables carry interval labels and "*" in numeric columns.
  bool generalized = false;
};

// Reads a dataset and reorders its columns to schema order.
inline Dataset load_dataset(std::istream& in, const Schema& schema,
                            LoadOptions options = {}) {
  validate_schema(schema);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw Error("dataset: missing header row");
  const auto header = split_delimited(line, ',');

  std::vector<std::string> missing, extra;
  std::set<std::string> header_names(header.begin(), header.end());
  if (header_names.size() != header.size()) {
    throw Error("dataset: duplicate column names in header");
  }
  for (const auto& a : schema.attributes) {
    if (!header_names.count(a.name)) missing.push_back(a.name);
  }
  for (const auto& h : header) {
    if (!schema.find(h)) extra.push_back(h);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "dataset: header does not match schema;";
    auto list = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
      return s;
    };
    if (!missing.empty()) msg += " missing: " + list(missing) + ";";
    if (!extra.empty()) msg += " extra: " + list(extra) + ";";
    throw Error(msg);
  }

  // column_of[i] = position in the file of schema attribute i.
  std::vector<std::size_t> column_of(schema.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    column_of[schema.index_of(header[c])] = c;
  }

  Dataset d{schema, {}};
  std::size_t row_index = 0;
  while (next_line()) {
    auto cells = split_delimited(line, ',');
    if (cells.size() != schema.size()) {
      throw Error("dataset: ragged row " + std::to_string(row_index) +
                  " (line " + std::to_string(line_no) + "): expected " +
                  std::to_string(schema.size()) + " cells, got " +
                  std::to_string(cells.size()));
    }
    Row row(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
      row[i] = std::move(cells[column_of[i]]);
      const auto& a = schema.attributes[i];
      if (!options.generalized && a.kind == Kind::kNumericOrdinal &&
          row[i] != "?" && !parses_as_integer(row[i])) {
        throw Error("dataset: row " + std::to_string(row_index) +
                    ": attribute '" + a.name + "' is not an integer: '" +
                    row[i] + "'");
      }
    }
    d.rows.push_back(std::move(row));
    ++row_index;
  }
  return d;
}

inline Dataset load_dataset_file(const std::string& path, const Schema& schema,
                                 LoadOptions options = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file '" + path + "'");
  return load_dataset(in, schema, options);
}

inline void write_dataset(std::ostream& out, const Dataset& d) {
  for (std::size_t i = 0; i < d.schema.size(); ++i) {
    out << (i ? "," : "") << quote_cell(d.schema.attributes[i].name, ',');
  }
  out << '\n';
  for (const auto& row : d.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << quote_cell(row[i], ',');
    }
    out << '\n';
  }
}

inline void write_dataset_file(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file '" + path + "'");
  write_dataset(out, d);
}

inline Dataset drop_identifiers(const Dataset& d) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.schema.size(); ++i) {
    if (d.schema.attributes[i].role != Role::kIdentifier) keep.push_back(i);
  }
  Dataset out;
  out.schema.positive_label = d.schema.positive_label;
  for (auto i : keep) out.schema.attributes.push_back(d.schema.attributes[i]);
  out.rows.reserve(d.rows.size());
  for (const auto& row : d.rows) {
    Row r;
    r.reserve(keep.size());
    for (auto i : keep) r.push_back(row[i]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

struct SplitPair {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
  // Source row indices, ascending.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// Per-label train counts: floor(n_v * fraction), then largest remainders
// (ties to the lexicographically smaller label) until the total reaches
// round(n * fraction).
inline std::map<std::string, std::size_t> stratified_train_counts(
    const std::map<std::string, std::size_t>& label_counts, double fraction) {
  std::size_t total = 0;
  for (const auto& [label, n] : label_counts) total += n;
  const auto target =
      static_cast<std::size_t>(std::llround(static_cast<double>(total) * fraction));

  std::map<std::string, std::size_t> out;
  std::vector<std::pair<double, std::string>> remainders;
  std::size_t assigned = 0;
  for (const auto& [label, n] : label_counts) {
    const double exact = static_cast<double>(n) * fraction;
    const auto base = static_cast<std::size_t>(std::floor(exact));
    out[label] = base;
    assigned += base;
    remainders.emplace_back(exact - static_cast<double>(base), label);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < target && i < remainders.size(); ++i) {
    ++out[remainders[i].second];
    ++assigned;
  }
  return out;
}

// Stratified on the sensitive attribute. Each label group is shuffled with a
// seeded Fisher-Yates pass (groups visited in ascending label order, one
// generator) and its first train-count rows go to train.
inline SplitPair split_stratified(const Dataset& d, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("split: train fraction must lie in (0, 1)");
  }
  const auto label_col = d.schema.sensitive_index();
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    groups[d.rows[i][label_col]].push_back(i);
  }
  std::map<std::string, std::size_t> label_counts;
  for (const auto& [label, rows] : groups) {
    if (rows.size() < 2) {
      throw Error("split: label '" + label + "' occurs only once");
    }
    label_counts[label] = rows.size();
  }
  const auto train_counts = stratified_train_counts(label_counts, train_fraction);

  Rng rng(seed);
  SplitPair out;
  out.seed = seed;
  for (auto& [label, rows] : groups) {
    fisher_yates(rows, rng);
    const auto take = train_counts.at(label);
    out.train_rows.insert(out.train_rows.end(), rows.begin(), rows.begin() + take);
    out.test_rows.insert(out.test_rows.end(), rows.begin() + take, rows.end());
  }
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = d.subset(out.train_rows);
  out.test = d.subset(out.test_rows);
  return out;
}

}  // namespace anonkit
