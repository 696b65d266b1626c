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

#include <algorithm>
#include <cmath>
#include <utility>

#include "fairgrade/errors.h"

namespace fairgrade {

MeritVector::MeritVector(std::vector<double> values)
    : values_(std::move(values)), covered_(values_.size(), 1) {
  for (double x : values_) {
    if (!std::isfinite(x)) throw ParameterError("merits must be finite");
  }
}

MeritVector MeritVector::FromParts(std::span<const double> abilities,
                                   std::span<const double> difficulties) {
  std::vector<double> values(abilities.begin(), abilities.end());
  values.insert(values.end(), difficulties.begin(), difficulties.end());
  return MeritVector(std::move(values));
}

double MeritVector::at(int v) const {
  if (v < 0 || v >= num_vertices() || !covered_[v]) {
    throw MissingMeritError("no merit for vertex " + std::to_string(v));
  }
  return values_[v];
}

void MeritVector::Set(int v, double value) {
  if (!std::isfinite(value)) throw ParameterError("merits must be finite");
  values_[v] = value;
  covered_[v] = 1;
  normalization_ = Normalization::kNone;
}

std::vector<int> MeritVector::CoveredVertices() const {
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v) {
    if (covered_[v]) out.push_back(v);
  }
  return out;
}

void MeritVector::NormalizeMeanZero() {
  double sum = 0.0;
  int count = 0;
  for (int v = 0; v < num_vertices(); ++v) {
    if (covered_[v]) {
      sum += values_[v];
      ++count;
    }
  }
  if (count == 0) return;
  const double mean = sum / count;
  for (int v = 0; v < num_vertices(); ++v) {
    if (covered_[v]) values_[v] -= mean;
  }
  normalization_ = Normalization::kMeanZero;
  anchor_ = -1;
}

void MeritVector::Anchor(int v) {
  const double shift = at(v);
  for (int w = 0; w < num_vertices(); ++w) {
    if (covered_[w]) values_[w] -= shift;
  }
  values_[v] = 0.0;
  normalization_ = Normalization::kAnchored;
  anchor_ = v;
}

void MeritVector::Shift(double c) {
  for (int v = 0; v < num_vertices(); ++v) {
    if (covered_[v]) values_[v] += c;
  }
  normalization_ = Normalization::kNone;
  anchor_ = -1;
}

double MeritSpan(const MeritVector& u) {
  double lo = INFINITY, hi = -INFINITY;
  for (int v = 0; v < u.num_vertices(); ++v) {
    if (!u.Covers(v)) continue;
    lo = std::min(lo, u[v]);
    hi = std::max(hi, u[v]);
  }
  if (lo > hi) throw ParameterError("merit span of an empty vector");
  return hi - lo;
}

double Logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double LogLogistic(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double AnswerProbability(const MeritVector& u, const Roster& roster,
                         int student, int question) {
  return Logistic(u.at(roster.StudentVertex(student)) -
                  u.at(roster.QuestionVertex(question)));
}

ExamResultGraph SampleExamResult(
    std::shared_ptr<const TaskAssignmentGraph> assignment,
    const MeritVector& u, Rng& rng) {
  const Roster& roster = assignment->roster();
  std::vector<uint8_t> outcomes;
  outcomes.reserve(assignment->edges().size());
  for (const Edge& e : assignment->edges()) {
    const double p = AnswerProbability(u, roster, e.student, e.question);
    outcomes.push_back(rng.Uniform01() < p ? 1 : 0);
  }
  return ExamResultGraph(std::move(assignment), std::move(outcomes));
}

ExamResultGraph SampleExamResult(
    std::shared_ptr<const TaskAssignmentGraph> assignment,
    const MeritVector& u, uint64_t seed) {
  Rng rng(seed);
  return SampleExamResult(std::move(assignment), u, rng);
}

GradeVector Benchmark(const MeritVector& u, const Roster& roster) {
  GradeVector out{std::vector<double>(roster.num_students()), "benchmark"};
  for (int i = 0; i < roster.num_students(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < roster.num_questions(); ++j) {
      sum += AnswerProbability(u, roster, i, j);
    }
    out.grades[i] = sum / roster.num_questions();
  }
  return out;
}

double LogLikelihood(const MeritVector& u, const ExamResultGraph& g) {
  double total = 0.0;
  for (int v = 0; v < g.num_vertices(); ++v) {
    for (int w : g.Successors(v)) total += LogLogistic(u.at(v) - u.at(w));
  }
  return total;
}

}  // namespace fairgrade
