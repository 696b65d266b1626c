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

#include "fairgrade/grading.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fairgrade/errors.h"

namespace fairgrade {
namespace {

void RequirePositiveDegrees(const ExamResultGraph& g) {
  const TaskAssignmentGraph& a = g.assignment();
  for (int i = 0; i < a.roster().num_students(); ++i) {
    if (a.Degree(i) == 0) {
      throw ZeroDegreeError("student '" + a.roster().student(i) +
                            "' has no assigned question");
    }
  }
}

// Whether component c holds a student and a question that are not adjacent.
bool NeedsFit(const ExamResultGraph& g, const ComponentStructure& cs, int c) {
  const Roster& roster = g.roster();
  int students = 0, questions = 0, inner_edges = 0;
  for (int v : cs.component(c)) {
    if (!roster.IsStudentVertex(v)) {
      ++questions;
      continue;
    }
    ++students;
    for (int j : g.assignment().QuestionsOf(v)) {
      if (cs.component_of(roster.QuestionVertex(j)) == c) ++inner_edges;
    }
  }
  return inner_edges < students * questions;
}

}  // namespace

GradeVector SimpleAverage(const ExamResultGraph& g) {
  RequirePositiveDegrees(g);
  const Roster& roster = g.roster();
  GradeVector out{std::vector<double>(roster.num_students()), "avg"};
  for (int i = 0; i < roster.num_students(); ++i) {
    const int v = roster.StudentVertex(i);
    out.grades[i] = static_cast<double>(g.OutDegree(v)) /
                    (g.InDegree(v) + g.OutDegree(v));
  }
  return out;
}

Prediction Predict(const ExamResultGraph& g, const MleOptions& mle) {
  RequirePositiveDegrees(g);
  const Roster& roster = g.roster();
  const int n = roster.num_students();
  const int q = roster.num_questions();
  Prediction out{PredictionMatrix(n, q), StronglyConnectedComponents(g), {}};
  PredictionMatrix& h = out.matrix;
  const ComponentStructure& cs = out.components;

  std::vector<PairCase> tags(static_cast<size_t>(n) * q);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < q; ++j) {
      tags[static_cast<size_t>(i) * q + j] = ClassifyPair(cs, g, i, j);
    }
  }
  auto tag = [&](int i, int j) { return tags[static_cast<size_t>(i) * q + j]; };

  // Case 1.
  std::span<const Edge> edges = g.assignment().edges();
  std::span<const uint8_t> w = g.outcomes();
  for (size_t k = 0; k < edges.size(); ++k) {
    h.Set(edges[k].student, edges[k].question, w[k], PairCase::kExistingEdge);
  }

  // Case 2.
  for (int c = 0; c < cs.num_components(); ++c) {
    if (cs.component(c).size() < 2 || !NeedsFit(g, cs, c)) continue;
    FitReport fit;
    try {
      fit = MleFit(g, cs.component(c), mle);
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError(
          "component " + std::to_string(c) + ": " + e.what(), e.best(), c);
    }
    for (int si : cs.component(c)) {
      if (!roster.IsStudentVertex(si)) continue;
      for (int qv : cs.component(c)) {
        if (roster.IsStudentVertex(qv)) continue;
        const int j = roster.QuestionOf(qv);
        if (tag(si, j) != PairCase::kSameComponent) continue;
        h.Set(si, j, Logistic(fit.merits[si] - fit.merits[qv]),
              PairCase::kSameComponent);
      }
    }
    out.fits.emplace_back(c, std::move(fit));
  }

  // Cases 3 and 4.
  for (int i = 0; i < n; ++i) {
    double filled_sum = 0.0;
    int filled = 0;
    for (int j = 0; j < q; ++j) {
      const PairCase t = tag(i, j);
      if (t == PairCase::kStudentAbove) h.Set(i, j, 1.0, t);
      if (t == PairCase::kQuestionAbove) h.Set(i, j, 0.0, t);
      if (t != PairCase::kIncomparable) {
        filled_sum += h.at(i, j);
        ++filled;
      }
    }
    // filled >= 1 because every student has an assigned question.
    const double row_mean = filled_sum / filled;
    for (int j = 0; j < q; ++j) {
      if (tag(i, j) == PairCase::kIncomparable) {
        h.Set(i, j, row_mean, PairCase::kIncomparable);
      }
    }
  }
  return out;
}

PredictionMatrix PredictMatrix(const ExamResultGraph& g,
                               const MleOptions& mle) {
  return Predict(g, mle).matrix;
}

GradeVector AggregateRows(const PredictionMatrix& h, std::string rule_name) {
  GradeVector out{std::vector<double>(h.num_students()), std::move(rule_name)};
  for (int i = 0; i < h.num_students(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < h.num_questions(); ++j) sum += h.at(i, j);
    out.grades[i] = sum / h.num_questions();
  }
  return out;
}

GradeVector Grade(const ExamResultGraph& g, const MleOptions& mle) {
  return AggregateRows(PredictMatrix(g, mle), "ours");
}

double PerStudentErrorBound(const FitReport& fit, const MeritVector& truth) {
  if (fit.vertices.empty()) return 0.0;
  double fit_mean = 0.0, truth_mean = 0.0;
  for (int v : fit.vertices) {
    fit_mean += fit.merits.at(v);
    truth_mean += truth.at(v);
  }
  fit_mean /= static_cast<double>(fit.vertices.size());
  truth_mean /= static_cast<double>(fit.vertices.size());
  double worst = 0.0;
  for (int v : fit.vertices) {
    worst = std::max(worst, std::abs((fit.merits.at(v) - fit_mean) -
                                     (truth.at(v) - truth_mean)));
  }
  return 0.25 * worst * worst;
}

GradeVector MapRule::Apply(const ExamResultGraph& g) const {
  const FitReport fit = MapFit(g, prior_, options_);
  const Roster& roster = g.roster();
  PredictionMatrix h(roster.num_students(), roster.num_questions());
  for (int i = 0; i < roster.num_students(); ++i) {
    for (int j = 0; j < roster.num_questions(); ++j) {
      if (std::optional<bool> w = g.Outcome(i, j)) {
        h.Set(i, j, *w ? 1.0 : 0.0, PairCase::kExistingEdge);
      } else {
        h.Set(i, j,
              Logistic(fit.merits[roster.StudentVertex(i)] -
                       fit.merits[roster.QuestionVertex(j)]),
              PairCase::kSameComponent);
      }
    }
  }
  return AggregateRows(h, name());
}

std::unique_ptr<GradingRule> MakeRule(const std::string& name,
                                      const MleOptions& mle,
                                      const PriorSpec& prior) {
  if (name == "avg") return std::make_unique<AveragingRule>();
  if (name == "ours") return std::make_unique<StructuralRule>(mle);
  if (name == "map") return std::make_unique<MapRule>(prior);
  throw ParameterError("unknown grading rule '" + name +
                       "' (expected avg, ours or map)");
}

}  // namespace fairgrade
