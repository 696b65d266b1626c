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

#ifndef FAIRGRADE_MODEL_H_
#define FAIRGRADE_MODEL_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fairgrade/graph.h"
#include "fairgrade/random.h"

namespace fairgrade {

enum class Normalization { kNone, kMeanZero, kAnchored };

// Real merits over (a subset of) the vertices of a roster: abilities for
// students, difficulties for questions.
class MeritVector {
 public:
  MeritVector() = default;
  // Covers no vertex yet.
  explicit MeritVector(int num_vertices)
      : values_(num_vertices, 0.0), covered_(num_vertices, 0) {}
  // Covers every vertex.
  explicit MeritVector(std::vector<double> values);
  // Abilities followed by difficulties, in roster order.
  static MeritVector FromParts(std::span<const double> abilities,
                               std::span<const double> difficulties);

  int num_vertices() const { return static_cast<int>(values_.size()); }
  bool Covers(int v) const { return covered_[v] != 0; }
  // Throws MissingMeritError when v is not covered.
  double at(int v) const;
  // Unchecked.
  double operator[](int v) const { return values_[v]; }
  // Throws ParameterError on a non-finite value.
  void Set(int v, double value);

  std::vector<int> CoveredVertices() const;

  Normalization normalization() const { return normalization_; }
  int anchor() const { return anchor_; }

  // Shifts the covered entries to sum to zero.
  void NormalizeMeanZero();
  // Shifts the covered entries so that u_v == 0.
  void Anchor(int v);
  // Adds c to every covered entry and clears the normalization tag.
  void Shift(double c);

 private:
  std::vector<double> values_;
  std::vector<uint8_t> covered_;
  Normalization normalization_ = Normalization::kNone;
  int anchor_ = -1;
};

// Max minus min over the covered entries. Throws ParameterError when empty.
double MeritSpan(const MeritVector& u);

// 1 / (1 + e^{-x}).
double Logistic(double x);
// log(Logistic(x)) without overflow or cancellation.
double LogLogistic(double x);

// Probability that student i answers question j correctly.
double AnswerProbability(const MeritVector& u, const Roster& roster,
                         int student, int question);

// Draws one independent Bernoulli outcome per assigned pair.
ExamResultGraph SampleExamResult(
    std::shared_ptr<const TaskAssignmentGraph> assignment,
    const MeritVector& u, Rng& rng);
ExamResultGraph SampleExamResult(
    std::shared_ptr<const TaskAssignmentGraph> assignment,
    const MeritVector& u, uint64_t seed);

// Per-student grades in [0, 1], tagged with the rule that produced them.
struct GradeVector {
  std::vector<double> grades;
  std::string rule_name;
};

// Expected accuracy of each student on a uniformly random bank question.
GradeVector Benchmark(const MeritVector& u, const Roster& roster);

// Sum over the directed result edges a -> b of log f(u_a - u_b).
double LogLikelihood(const MeritVector& u, const ExamResultGraph& g);

}  // namespace fairgrade

#endif  // FAIRGRADE_MODEL_H_
