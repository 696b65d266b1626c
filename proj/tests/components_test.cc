// Copyright 2026 The Fairgrade Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairgrade/components.h"

#include <gtest/gtest.h>

#include "test_util.h"

namespace fairgrade {
namespace {

ComponentStructure FromLists(const std::vector<std::vector<int>>& adj) {
  return ComponentStructure(static_cast<int>(adj.size()), [&adj](int v) {
    return std::span<const int>(adj[v]);
  });
}

// Checks component_of and Reaches against the brute-force closure.
void ExpectMatchesOracle(const std::vector<std::vector<int>>& adj,
                         const ComponentStructure& cs) {
  const auto reach = testing::BruteForceReach(adj);
  const int n = static_cast<int>(adj.size());
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      const bool mutual = reach[u][v] && reach[v][u];
      ASSERT_EQ(cs.component_of(u) == cs.component_of(v), mutual)
          << "u=" << u << " v=" << v;
      ASSERT_EQ(cs.VertexReaches(u, v), static_cast<bool>(reach[u][v]));
      if (cs.VertexReaches(u, v)) {
        ASSERT_GE(cs.component_of(u), cs.component_of(v));
      }
    }
  }
}

TEST(ComponentsTest, RunningExample) {
  const ExamResultGraph g = testing::RunningExample();
  const Roster& r = g.roster();
  const ComponentStructure cs = StronglyConnectedComponents(g);
  const int core = cs.component_of(r.StudentVertex(0));
  EXPECT_EQ(cs.component(core),
            (std::vector<int>{r.StudentVertex(0), r.StudentVertex(1),
                              r.QuestionVertex(0), r.QuestionVertex(1)}));
  EXPECT_EQ(cs.component(cs.component_of(r.QuestionVertex(2))).size(), 1u);
  // 6 students + 3 questions: the core plus 5 singletons.
  EXPECT_EQ(cs.num_components(), 6);
  EXPECT_FALSE(IsStronglyConnected(g));
  EXPECT_EQ(ClassifyPair(cs, g, 1, 2), PairCase::kStudentAbove);
  EXPECT_EQ(ClassifyPair(cs, g, 1, 1), PairCase::kExistingEdge);
  ExpectMatchesOracle(testing::SuccessorLists(g), cs);
}

TEST(ComponentsTest, NoEdgesGivesSingletonsAndIdentityReach) {
  const ExamResultGraph g = testing::MakeExam(3, 2, {});
  const ComponentStructure cs = StronglyConnectedComponents(g);
  ASSERT_EQ(cs.num_components(), 5);
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) EXPECT_EQ(cs.Reaches(a, b), a == b);
  }
  // Unassigned pairs of isolated vertices are incomparable.
  EXPECT_EQ(ClassifyPair(cs, g, 0, 1), PairCase::kIncomparable);
}

TEST(ComponentsTest, PathThroughQuestion) {
  // S1 -> Q1 -> S2: three singletons, S1 reaches S2 but not back.
  const ExamResultGraph g = testing::MakeExam(2, 1, {{0, 0, 1}, {1, 0, 0}});
  const ComponentStructure cs = StronglyConnectedComponents(g);
  EXPECT_EQ(cs.num_components(), 3);
  EXPECT_TRUE(cs.VertexReaches(0, 1));
  EXPECT_FALSE(cs.VertexReaches(1, 0));
  EXPECT_TRUE(cs.VertexReaches(0, 2));
}

TEST(ComponentsTest, SingleEdgeIsNotStronglyConnected) {
  EXPECT_FALSE(IsStronglyConnected(testing::MakeExam(1, 1, {{0, 0, 1}})));
  EXPECT_FALSE(IsStronglyConnected(testing::MakeExam(1, 1, {{0, 0, 0}})));
}

TEST(ComponentsTest, AlternatingFourCycleIsStronglyConnected) {
  const ExamResultGraph g = testing::MakeExam(
      2, 2, {{0, 0, 1}, {1, 0, 0}, {1, 1, 1}, {0, 1, 0}});
  EXPECT_TRUE(IsStronglyConnected(g));
}

TEST(ComponentsTest, AllDigraphsOnUpToFourVertices) {
  for (int n = 1; n <= 4; ++n) {
    const int arcs = n * (n - 1);
    for (uint32_t mask = 0; mask < (1u << arcs); ++mask) {
      std::vector<std::vector<int>> adj(n);
      int bit = 0;
      for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
          if (u == v) continue;
          if ((mask >> bit++) & 1u) adj[u].push_back(v);
        }
      }
      ExpectMatchesOracle(adj, FromLists(adj));
    }
  }
}

TEST(ComponentsTest, RandomDigraphsOnFiveAndSixVertices) {
  Rng rng(17);
  for (int trial = 0; trial < 20000; ++trial) {
    const int n = 5 + static_cast<int>(rng.UniformInt(2));
    const double density = 0.1 + 0.5 * rng.Uniform01();
    std::vector<std::vector<int>> adj(n);
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        if (u != v && rng.Uniform01() < density) adj[u].push_back(v);
      }
    }
    ExpectMatchesOracle(adj, FromLists(adj));
  }
}

TEST(ComponentsTest, ClassificationIsExhaustiveAndMatchesReachability) {
  Rng rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.UniformInt(6));
    const int q = 1 + static_cast<int>(rng.UniformInt(6));
    const ExamResultGraph g =
        testing::RandomExam(n, q, 0.2 + 0.6 * rng.Uniform01(), rng);
    const ComponentStructure cs = StronglyConnectedComponents(g);
    const auto reach = testing::BruteForceReach(testing::SuccessorLists(g));
    EXPECT_EQ(IsStronglyConnected(g), cs.num_components() == 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < q; ++j) {
        const int s = g.roster().StudentVertex(i);
        const int v = g.roster().QuestionVertex(j);
        PairCase expected;
        if (g.assignment().HasEdge(i, j)) {
          expected = PairCase::kExistingEdge;
        } else if (reach[s][v] && reach[v][s]) {
          expected = PairCase::kSameComponent;
        } else if (reach[s][v]) {
          expected = PairCase::kStudentAbove;
        } else if (reach[v][s]) {
          expected = PairCase::kQuestionAbove;
        } else {
          expected = PairCase::kIncomparable;
        }
        EXPECT_EQ(ClassifyPair(cs, g, i, j), expected);
      }
    }
  }
}

}  // namespace
}  // namespace fairgrade
