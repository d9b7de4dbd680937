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

#include "anonkit/partition.h"

#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "test_util.h"

namespace anonkit {
namespace {

std::vector<std::size_t> sizes(const Partition& p) {
  std::vector<std::size_t> out;
  for (const auto& c : p.classes) out.push_back(c.size());
  return out;
}

// Partition with the given class sizes on one QI.
Partition with_sizes(const std::vector<std::size_t>& ns) {
  Dataset d{testing::qi_schema(1), {}};
  for (std::size_t c = 0; c < ns.size(); ++c) {
    for (std::size_t i = 0; i < ns[c]; ++i) d.rows.push_back({"v" + std::to_string(c), "s0"});
  }
  return partition_classes(d);
}

TEST(ApplyGeneralizationTest, ZeroVectorIsIdentity) {
  Rng rng(3);
  const auto inst = testing::random_instance(rng, 30, 3);
  const GeneralizationVector zero{std::vector<int>(inst.data.schema.quasi_identifier_indices().size(), 0)};
  EXPECT_EQ(apply_generalization(inst.data, inst.hierarchies, zero), inst.data);
}

TEST(ApplyGeneralizationTest, AgeAndSex) {
  Schema s;
  s.attributes = {{"age", Role::kQuasiIdentifier, Kind::kNumericOrdinal},
                  {"sex", Role::kQuasiIdentifier, Kind::kCategorical},
                  {"sa", Role::kSensitive, Kind::kCategorical}};
  std::istringstream age_file("23;[20, 25);[20, 30);*\n");
  HierarchySet hs;
  hs.emplace("age", load_hierarchy(age_file, "age"));
  hs.emplace("sex", Hierarchy::identity("sex"));
  const Dataset d{s, {{"23", "Male", "x"}}};
  const auto out = apply_generalization(d, hs, {{1, 0}});
  EXPECT_EQ(out.rows[0], (Row{"[20, 25)", "Male", "x"}));
}

TEST(ApplyGeneralizationTest, TopOfLatticeIsAllStars) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testing::random_instance(rng, 20, 3);
    const auto qis = inst.data.schema.quasi_identifier_indices();
    GeneralizationVector top;
    for (auto q : qis) top.levels.push_back(inst.hierarchies.at(inst.data.schema.attributes[q].name).height());
    const auto out = apply_generalization(inst.data, inst.hierarchies, top);
    for (const auto& row : out.rows) {
      for (std::size_t i = 0; i < qis.size(); ++i) {
        if (top.levels[i] > 0) EXPECT_EQ(row[qis[i]], "*");
      }
    }
  }
}

TEST(ApplyGeneralizationTest, LevelOutOfRange) {
  Rng rng(5);
  const auto inst = testing::random_instance(rng, 5, 1);
  EXPECT_THROW(apply_generalization(inst.data, inst.hierarchies, {{7}}), Error);
  EXPECT_THROW(apply_generalization(inst.data, inst.hierarchies, {{0, 0, 0, 0}}), Error);
}

TEST(PartitionClassesTest, AllIdentical) {
  const auto p = with_sizes({6});
  ASSERT_EQ(p.classes.size(), 1u);
  EXPECT_EQ(p.classes[0].size(), 6u);
  EXPECT_TRUE(p.suppressed.empty());
}

TEST(PartitionClassesTest, SizesTwoTwoOne) {
  const auto d = testing::make_dataset(testing::qi_schema(2), {{"a", "x", "s0"},
                                                               {"b", "y", "s1"},
                                                               {"a", "x", "s1"},
                                                               {"c", "x", "s0"},
                                                               {"b", "y", "s1"}});
  const auto p = partition_classes(d);
  EXPECT_EQ(sizes(p), (std::vector<std::size_t>{2, 2, 1}));
  EXPECT_EQ(p.classes[0].sa_counts.at("s0"), 1u);
  EXPECT_EQ(p.classes[1].sa_counts.at("s1"), 2u);
  EXPECT_TRUE(partition_is_valid(p));
}

TEST(PartitionClassesTest, Empty) {
  const auto p = partition_classes(Dataset{testing::qi_schema(1), {}});
  EXPECT_TRUE(p.classes.empty());
  EXPECT_TRUE(partition_is_valid(p));
}

TEST(SuppressSmallClassesTest, KOneIsIdentity) {
  const auto p = with_sizes({3, 1, 2});
  const auto q = suppress_small_classes(p, 1);
  EXPECT_EQ(sizes(q), sizes(p));
  EXPECT_TRUE(q.suppressed.empty());
}

TEST(SuppressSmallClassesTest, FiveThreeOne) {
  const auto q = suppress_small_classes(with_sizes({5, 3, 1}), 3);
  EXPECT_EQ(sizes(q), (std::vector<std::size_t>{5, 3}));
  EXPECT_EQ(q.suppressed.size(), 1u);
  EXPECT_TRUE(partition_is_valid(q));
}

TEST(SuppressSmallClassesTest, AllBelowThreshold) {
  const auto q = suppress_small_classes(with_sizes({2, 2}), 5);
  EXPECT_TRUE(q.classes.empty());
  EXPECT_EQ(q.suppressed.size(), 4u);
  EXPECT_TRUE(partition_is_valid(q));
}

TEST(PartitionValidatorTest, CatchesOverlap) {
  auto p = with_sizes({2, 1});
  p.suppressed.push_back(p.classes[0].members[0]);
  std::string why;
  EXPECT_FALSE(partition_is_valid(p, &why));
  EXPECT_FALSE(why.empty());
}

TEST(RemoveSuppressedTest, DropsRows) {
  Dataset d{testing::qi_schema(1), {{"a", "s0"}, {"b", "s0"}, {"a", "s1"}}};
  const auto p = suppress_small_classes(partition_classes(d), 2);
  const auto out = remove_suppressed(d, p);
  EXPECT_EQ(out.rows, (std::vector<Row>{{"a", "s0"}, {"a", "s1"}}));
}

// Properties over random instances: coverage and disjointness, sa_counts
// totals, suppression idempotence and the coarsening containment.
TEST(PartitionProperty, RandomInstances) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = testing::random_instance(rng, 60, 3, 3);
    const auto& d = inst.data;
    const auto qis = d.schema.quasi_identifier_indices();
    std::vector<int> heights;
    for (auto q : qis) heights.push_back(inst.hierarchies.at(d.schema.attributes[q].name).height());
    GeneralizationVector g, g2;
    for (int h : heights) {
      const int lo = static_cast<int>(uniform_below(rng, static_cast<std::size_t>(h) + 1));
      g.levels.push_back(lo);
      g2.levels.push_back(lo + static_cast<int>(uniform_below(rng, static_cast<std::size_t>(h - lo) + 1)));
    }
    const auto p = partition_classes(apply_generalization(d, inst.hierarchies, g));
    std::string why;
    ASSERT_TRUE(partition_is_valid(p, &why)) << why;
    for (std::size_t i = 0; i < p.classes.size(); ++i) {
      std::size_t total = 0;
      for (const auto& [v, n] : p.classes[i].sa_counts) total += n;
      EXPECT_EQ(total, p.classes[i].size());
      if (i > 0) EXPECT_LT(p.classes[i - 1].signature, p.classes[i].signature);
    }

    const std::size_t k = 1 + uniform_below(rng, 6);
    const auto s = suppress_small_classes(p, k);
    ASSERT_TRUE(partition_is_valid(s, &why)) << why;
    for (const auto& c : s.classes) EXPECT_GE(c.size(), k);
    const auto s2 = suppress_small_classes(s, k);
    EXPECT_EQ(sizes(s2), sizes(s));
    EXPECT_EQ(s2.suppressed.size(), s.suppressed.size());

    // Coarser node never splits a class.
    const auto p2 = partition_classes(apply_generalization(d, inst.hierarchies, g2));
    std::map<std::size_t, std::size_t> class_of;
    for (std::size_t i = 0; i < p2.classes.size(); ++i) {
      for (auto r : p2.classes[i].members) class_of[r] = i;
    }
    for (const auto& c : p.classes) {
      for (auto r : c.members) EXPECT_EQ(class_of[r], class_of[c.members.front()]);
    }
  }
}

}  // namespace
}  // namespace anonkit
