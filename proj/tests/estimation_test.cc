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

#include "fairgrade/estimation.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairgrade/components.h"
#include "fairgrade/errors.h"
#include "test_util.h"

namespace fairgrade {
namespace {

using testing::BruteForceMle;
using testing::Defect;
using testing::InducedLogLikelihood;
using testing::LogF;
using testing::MakeExam;

std::vector<int> AllVertices(const ExamResultGraph& g) {
  std::vector<int> v(g.num_vertices());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Random strongly connected exams with at most `max_vertices` vertices.
std::vector<ExamResultGraph> StronglyConnectedSamples(int count,
                                                      int max_vertices,
                                                      uint64_t seed) {
  Rng rng(seed);
  std::vector<ExamResultGraph> out;
  while (static_cast<int>(out.size()) < count) {
    const int n = 1 + static_cast<int>(rng.UniformInt(max_vertices - 1));
    const int q = 1 + static_cast<int>(rng.UniformInt(max_vertices - n));
    if (n + q < 2) continue;
    ExamResultGraph g = testing::RandomExam(n, q, 0.8, rng);
    if (IsStronglyConnected(g)) out.push_back(std::move(g));
  }
  return out;
}

TEST(MleFitTest, AlternatingCycleGivesZeros) {
  const ExamResultGraph g =
      MakeExam(2, 2, {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}, {1, 1, 1}});
  const FitReport fit = MleFit(g, AllVertices(g));
  EXPECT_TRUE(fit.converged);
  for (int v = 0; v < 4; ++v) EXPECT_NEAR(fit.merits.at(v), 0.0, 1e-10);
  EXPECT_EQ(fit.merits.normalization(), Normalization::kMeanZero);
}

TEST(MleFitTest, RunningExampleCore) {
  const ExamResultGraph g = testing::RunningExample();
  const std::vector<int> core{0, 1, 6, 7};
  const FitReport fit = MleFit(g, core);
  EXPECT_EQ(fit.vertices, core);
  EXPECT_LE(Defect(g, core, fit.merits), 1e-8);
  const std::vector<double> oracle = BruteForceMle(g, core);
  for (int v : core) EXPECT_NEAR(fit.merits.at(v), oracle[v], 1e-3);
  EXPECT_FALSE(fit.merits.Covers(2));
}

TEST(MleFitTest, MatchesBruteForceOracle) {
  for (const ExamResultGraph& g : StronglyConnectedSamples(10, 5, 11)) {
    const std::vector<int> all = AllVertices(g);
    const FitReport fit = MleFit(g, all);
    const std::vector<double> oracle = BruteForceMle(g, all);
    for (int v : all) EXPECT_NEAR(fit.merits.at(v), oracle[v], 1e-3);
  }
}

TEST(MleFitTest, ResidualContract) {
  for (const ExamResultGraph& g : StronglyConnectedSamples(40, 9, 12)) {
    const std::vector<int> all = AllVertices(g);
    const FitReport fit = MleFit(g, all);
    EXPECT_LE(fit.residual, 1e-8);
    EXPECT_LE(Defect(g, all, fit.merits), 1e-8);
    EXPECT_NEAR(LikelihoodResidual(g, all, fit.merits), fit.residual, 1e-12);
  }
}

TEST(MleFitTest, LikelihoodNeverDecreases) {
  for (const ExamResultGraph& g : StronglyConnectedSamples(30, 10, 13)) {
    const std::vector<int> all = AllVertices(g);
    std::vector<char> in_set(g.num_vertices(), 1);
    double previous = -INFINITY;
    int calls = 0;
    MleOptions options;
    options.on_iterate = [&](int, const MeritVector& u) {
      std::vector<double> values(g.num_vertices());
      for (int v : all) values[v] = u.at(v);
      const double ll = InducedLogLikelihood(g, in_set, values);
      EXPECT_GE(ll, previous - 1e-12);
      previous = ll;
      ++calls;
    };
    MleFit(g, all, options);
    EXPECT_GE(calls, 1);
  }
}

TEST(MleFitTest, InitialShiftInvariance) {
  for (const ExamResultGraph& g : StronglyConnectedSamples(10, 8, 14)) {
    const std::vector<int> all = AllVertices(g);
    Rng rng(5);
    std::vector<double> start(g.num_vertices());
    for (double& x : start) x = rng.Normal();
    MleOptions a, b;
    a.initial = MeritVector(start);
    for (double& x : start) x += 7.25;
    b.initial = MeritVector(start);
    const FitReport fa = MleFit(g, all, a), fb = MleFit(g, all, b);
    for (int v : all) EXPECT_NEAR(fa.merits.at(v), fb.merits.at(v), 1e-7);
  }
}

TEST(MleFitTest, SubsetUsesOnlyInducedEdges) {
  const ExamResultGraph g = testing::RunningExample();
  const std::vector<int> core{0, 1, 6, 7};
  MleOptions options;
  std::vector<double> start(g.num_vertices(), 0.0);
  start[2] = 100.0;
  options.initial = MeritVector(start);
  const FitReport fit = MleFit(g, core, options);
  for (int v : core) EXPECT_NEAR(fit.merits.at(v), 0.0, 1e-10);
}

TEST(MleFitTest, NotStronglyConnected) {
  const ExamResultGraph one = MakeExam(1, 1, {{0, 0, 1}});
  EXPECT_THROW(MleFit(one, AllVertices(one)), NotStronglyConnectedError);
  const ExamResultGraph g = testing::RunningExample();
  EXPECT_THROW(MleFit(g, AllVertices(g)), NotStronglyConnectedError);
  const std::vector<int> apart{0, 2};
  EXPECT_THROW(MleFit(g, apart), NotStronglyConnectedError);
}

TEST(MleFitTest, SingleVertexIsTrivial) {
  const ExamResultGraph g = testing::RunningExample();
  const std::vector<int> single{8};
  const FitReport fit = MleFit(g, single);
  EXPECT_TRUE(fit.converged);
  EXPECT_EQ(fit.merits.at(8), 0.0);
}

TEST(MleFitTest, NonConvergenceCarriesBestIterate) {
  const ExamResultGraph g =
      MakeExam(3, 3, {{0, 0, 1}, {0, 1, 1}, {0, 2, 0}, {1, 0, 0}, {1, 1, 1},
                      {1, 2, 1}, {2, 0, 1}, {2, 1, 0}, {2, 2, 0}});
  ASSERT_TRUE(IsStronglyConnected(g));
  MleOptions options;
  options.max_iterations = 1;
  options.tolerance = 1e-14;
  try {
    MleFit(g, AllVertices(g), options);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_FALSE(e.best().converged);
    EXPECT_GT(e.best().residual, 1e-14);
    EXPECT_EQ(e.best().merits.CoveredVertices().size(), 6u);
    EXPECT_EQ(e.component(), -1);
  }
}

TEST(MapFitTest, NoEdgesGivesPriorMeans) {
  const ExamResultGraph g = MakeExam(3, 2, {});
  PriorSpec prior{0.4, 2.0, -1.5, 0.5};
  const FitReport fit = MapFit(g, prior);
  for (int v = 0; v < 3; ++v) EXPECT_EQ(fit.merits.at(v), 0.4);
  for (int v = 3; v < 5; ++v) EXPECT_EQ(fit.merits.at(v), -1.5);
  EXPECT_EQ(fit.merits.normalization(), Normalization::kNone);
}

TEST(MapFitTest, VanishingPriorApproachesMle) {
  for (const ExamResultGraph& g : StronglyConnectedSamples(10, 8, 15)) {
    const FitReport mle = MleFit(g, AllVertices(g));
    const FitReport map = MapFit(g, PriorSpec{0.0, 1e6, 0.0, 1e6});
    EXPECT_TRUE(map.converged);
    for (int a = 0; a < g.num_vertices(); ++a) {
      for (int b = 0; b < g.num_vertices(); ++b) {
        EXPECT_NEAR(map.merits.at(a) - map.merits.at(b),
                    mle.merits.at(a) - mle.merits.at(b), 1e-3);
      }
    }
  }
}

TEST(MapFitTest, SingleAnswerMatchesGridSearch) {
  const ExamResultGraph g = MakeExam(1, 1, {{0, 0, 1}});
  const FitReport fit = MapFit(g, PriorSpec{});
  double best_t = 0.0, best = -INFINITY;
  for (double t = 0.0; t <= 3.0; t += 1e-5) {
    const double value = LogF(t) - t * t / 4.0;
    if (value > best) best = value, best_t = t;
  }
  EXPECT_NEAR(fit.merits.at(0), best_t / 2, 1e-4);
  EXPECT_NEAR(fit.merits.at(1), -best_t / 2, 1e-4);
  EXPECT_LE(fit.residual, 1e-8);
}

TEST(MapFitTest, GradientMatchesFiniteDifferences) {
  Rng rng(16);
  const ExamResultGraph g = testing::RandomExam(4, 5, 0.6, rng);
  const PriorSpec prior{0.2, 1.3, -0.4, 0.7};
  std::vector<double> x(g.num_vertices());
  for (double& v : x) v = rng.Normal();
  auto objective = [&](const std::vector<double>& y) {
    double total = LogLikelihood(MeritVector(y), g);
    for (int v = 0; v < g.num_vertices(); ++v) {
      const bool s = g.roster().IsStudentVertex(v);
      const double z = (y[v] - (s ? prior.student_mean : prior.question_mean)) /
                       (s ? prior.student_std : prior.question_std);
      total -= z * z / 2;
    }
    return total;
  };
  const std::vector<double> grad =
      LogPosteriorGradient(g, prior, MeritVector(x));
  for (int v = 0; v < g.num_vertices(); ++v) {
    std::vector<double> up = x, down = x;
    up[v] += 1e-5;
    down[v] -= 1e-5;
    EXPECT_NEAR(grad[v], (objective(up) - objective(down)) / 2e-5, 1e-6);
  }
}

TEST(MapFitTest, StationaryOnRandomExams) {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const ExamResultGraph g = testing::RandomExam(6, 6, 0.5, rng);
    const PriorSpec prior{0.5, 1.0, -0.5, 2.0};
    const FitReport fit = MapFit(g, prior);
    const std::vector<double> grad = LogPosteriorGradient(g, prior, fit.merits);
    for (double x : grad) EXPECT_LE(std::abs(x), 1e-8);
  }
}

TEST(MapFitTest, InvalidPrior) {
  const ExamResultGraph g = MakeExam(1, 1, {});
  EXPECT_THROW(MapFit(g, PriorSpec{0, 0.0, 0, 1}), ParameterError);
  EXPECT_THROW(MapFit(g, PriorSpec{0, 1, 0, -1}), ParameterError);
}

}  // namespace
}  // namespace fairgrade
