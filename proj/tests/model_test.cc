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

#include "fairgrade/model.h"

#include <gtest/gtest.h>

#include <cmath>

#include "fairgrade/errors.h"
#include "test_util.h"

namespace fairgrade {
namespace {

TEST(LogisticTest, Values) {
  EXPECT_EQ(Logistic(0.0), 0.5);
  EXPECT_NEAR(Logistic(std::log(3.0)), 0.75, 1e-15);
  for (double x : {0.1, 1.0, 3.7, 20.0, 700.0}) {
    EXPECT_NEAR(Logistic(x) + Logistic(-x), 1.0, 1e-15);
  }
  EXPECT_GT(Logistic(-800.0), -1e-300);
  EXPECT_LT(Logistic(0.3), Logistic(0.31));
}

TEST(LogisticTest, LogLogisticIsStable) {
  EXPECT_NEAR(LogLogistic(0.0), std::log(0.5), 1e-15);
  EXPECT_NEAR(LogLogistic(2.0), std::log(Logistic(2.0)), 1e-15);
  EXPECT_NEAR(LogLogistic(-800.0), -800.0, 1e-9);
  EXPECT_TRUE(std::isfinite(LogLogistic(-1e5)));
  EXPECT_LE(LogLogistic(1e5), 0.0);
}

TEST(AnswerProbabilityTest, Values) {
  Roster roster({"s"}, {"q"});
  EXPECT_EQ(AnswerProbability(MeritVector({0.4, 0.4}), roster, 0, 0), 0.5);
  // Widest gap seen in the fitted real exam: ability 1.149, difficulty -3.090.
  EXPECT_NEAR(AnswerProbability(MeritVector({1.149, -3.090}), roster, 0, 0),
              0.9858, 5e-5);
  MeritVector u({0.3, -1.2});
  MeritVector shifted = u;
  shifted.Shift(5.5);
  EXPECT_NEAR(AnswerProbability(u, roster, 0, 0),
              AnswerProbability(shifted, roster, 0, 0), 1e-15);
}

TEST(AnswerProbabilityTest, MissingMerit) {
  Roster roster({"s"}, {"q"});
  MeritVector partial(2);
  partial.Set(0, 1.0);
  EXPECT_THROW(AnswerProbability(partial, roster, 0, 0), MissingMeritError);
}

TEST(MeritVectorTest, Normalizations) {
  MeritVector u({1.0, 2.0, 6.0});
  u.NormalizeMeanZero();
  EXPECT_EQ(u.normalization(), Normalization::kMeanZero);
  EXPECT_NEAR(u[0] + u[1] + u[2], 0.0, 1e-12);
  EXPECT_NEAR(u[2] - u[0], 5.0, 1e-12);
  u.Anchor(1);
  EXPECT_EQ(u.normalization(), Normalization::kAnchored);
  EXPECT_EQ(u[1], 0.0);
  EXPECT_NEAR(u[2], 4.0, 1e-12);
  EXPECT_THROW(MeritVector({1.0, NAN}), ParameterError);
}

TEST(MeritVectorTest, MeanZeroOverCoveredOnly) {
  MeritVector u(4);
  u.Set(1, 3.0);
  u.Set(3, 5.0);
  u.NormalizeMeanZero();
  EXPECT_DOUBLE_EQ(u.at(1), -1.0);
  EXPECT_DOUBLE_EQ(u.at(3), 1.0);
  EXPECT_THROW(u.at(0), MissingMeritError);
  EXPECT_EQ(u.CoveredVertices(), (std::vector<int>{1, 3}));
}

TEST(MeritSpanTest, Values) {
  EXPECT_EQ(MeritSpan(MeritVector({2.0, 2.0, 2.0})), 0.0);
  EXPECT_DOUBLE_EQ(MeritSpan(MeritVector({-1.0, 0.0, 2.0})), 3.0);
  EXPECT_NEAR(MeritSpan(MeritVector({1.149, -1.486, -3.090, 2.099})),
              2.099 + 3.090, 1e-12);
  EXPECT_NEAR(MeritSpan(MeritVector({1.149, -3.090})), 4.239, 1e-12);
  EXPECT_THROW(MeritSpan(MeritVector(3)), ParameterError);
}

TEST(SampleExamResultTest, SaturatedMeritsAlwaysCorrect) {
  auto roster = std::make_shared<const Roster>(Roster::Numbered(1000, 1));
  auto g = std::make_shared<const TaskAssignmentGraph>(
      TaskAssignmentGraph::Complete(roster));
  std::vector<double> abilities(1000, 25.0), difficulties{-25.0};
  const ExamResultGraph exam =
      SampleExamResult(g, MeritVector::FromParts(abilities, difficulties),
                       uint64_t{1});
  for (uint8_t w : exam.outcomes()) EXPECT_EQ(w, 1);
}

TEST(SampleExamResultTest, EqualMeritsGiveFairCoins) {
  auto roster = std::make_shared<const Roster>(Roster::Numbered(100, 100));
  auto g = std::make_shared<const TaskAssignmentGraph>(
      TaskAssignmentGraph::Complete(roster));
  const ExamResultGraph exam =
      SampleExamResult(g, MeritVector(std::vector<double>(200, 0.7)),
                       uint64_t{2});
  double correct = 0;
  for (uint8_t w : exam.outcomes()) correct += w;
  EXPECT_NEAR(correct / 10000.0, 0.5, 0.02);
}

TEST(SampleExamResultTest, Deterministic) {
  auto roster = std::make_shared<const Roster>(Roster::Numbered(10, 8));
  auto g = std::make_shared<const TaskAssignmentGraph>(
      GenerateAssignment(roster, 8, 4, uint64_t{3}));
  MeritVector u(std::vector<double>(18, 0.0));
  EXPECT_EQ(SampleExamResult(g, u, uint64_t{9}),
            SampleExamResult(g, u, uint64_t{9}));
}

TEST(BenchmarkTest, Values) {
  Roster r1 = Roster::Numbered(3, 4);
  for (double x : Benchmark(MeritVector(std::vector<double>(7, 1.3)), r1).grades) {
    EXPECT_EQ(x, 0.5);
  }
  Roster r2 = Roster::Numbered(1, 2);
  EXPECT_NEAR(Benchmark(MeritVector({0.0, -0.8, 0.8}), r2).grades[0], 0.5,
              1e-15);
  Roster r3 = Roster::Numbered(1, 3);
  EXPECT_NEAR(Benchmark(MeritVector({0.0, -1.0, 0.0, 1.0}), r3).grades[0],
              (Logistic(1.0) + 0.5 + Logistic(-1.0)) / 3.0, 1e-15);
  EXPECT_NEAR(Benchmark(MeritVector({0.0, -1.0, 0.0, 1.0}), r3).grades[0], 0.5,
              1e-15);
}

TEST(LogLikelihoodTest, Values) {
  EXPECT_EQ(LogLikelihood(MeritVector({0.0, 0.0}), testing::MakeExam(1, 1, {})),
            0.0);
  EXPECT_NEAR(LogLikelihood(MeritVector({0.2, 0.2}),
                            testing::MakeExam(1, 1, {{0, 0, 1}})),
              std::log(0.5), 1e-15);
  // Student 1 right, student 2 wrong on the single question.
  const ExamResultGraph g = testing::MakeExam(2, 1, {{0, 0, 1}, {1, 0, 0}});
  EXPECT_NEAR(LogLikelihood(MeritVector({0.3, -0.2, 0.1}), g),
              std::log(Logistic(0.2)) + std::log(Logistic(0.3)), 1e-15);
}

TEST(LogLikelihoodTest, NeverPositive) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const ExamResultGraph g = testing::RandomExam(4, 4, 0.6, rng);
    std::vector<double> values(8);
    for (double& x : values) x = 6.0 * rng.Uniform01() - 3.0;
    EXPECT_LE(LogLikelihood(MeritVector(values), g), 0.0);
  }
}

}  // namespace
}  // namespace fairgrade
