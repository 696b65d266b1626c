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

#ifndef FAIRGRADE_GRADING_H_
#define FAIRGRADE_GRADING_H_

#include <memory>
#include <string>
#include <vector>

#include "fairgrade/components.h"
#include "fairgrade/estimation.h"
#include "fairgrade/graph.h"
#include "fairgrade/model.h"

namespace fairgrade {

// Predicted correctness probability for every student x bank-question cell,
// with the case that produced each entry.
class PredictionMatrix {
 public:
  PredictionMatrix(int num_students, int num_questions)
      : num_questions_(num_questions),
        entries_(static_cast<size_t>(num_students) * num_questions, 0.0),
        tags_(entries_.size(), PairCase::kIncomparable) {}

  int num_students() const {
    return num_questions_ == 0
               ? 0
               : static_cast<int>(entries_.size()) / num_questions_;
  }
  int num_questions() const { return num_questions_; }

  double at(int i, int j) const { return entries_[Offset(i, j)]; }
  PairCase tag(int i, int j) const { return tags_[Offset(i, j)]; }
  void Set(int i, int j, double value, PairCase tag) {
    entries_[Offset(i, j)] = value;
    tags_[Offset(i, j)] = tag;
  }

 private:
  size_t Offset(int i, int j) const {
    return static_cast<size_t>(i) * num_questions_ + j;
  }

  int num_questions_;
  std::vector<double> entries_;
  std::vector<PairCase> tags_;
};

// Fraction of assigned questions answered correctly.
// Throws ZeroDegreeError if a student has no assigned question.
GradeVector SimpleAverage(const ExamResultGraph& g);

struct Prediction {
  PredictionMatrix matrix;
  ComponentStructure components;
  // One report per component that needed a fit, with its component id.
  std::vector<std::pair<int, FitReport>> fits;
};

// Fills every student x question cell:
//   assigned pair            -> the observed outcome,
//   same strong component    -> f(u*_i - u*_j) from the component's MLE,
//   only student reaches q   -> 1, only q reaches student -> 0,
//   incomparable             -> mean of the row's cells filled above.
// Components are fitted only when they hold a student and a question that are
// not adjacent. A NonConvergenceError from a fit is rethrown with the
// component id.
Prediction Predict(const ExamResultGraph& g, const MleOptions& mle = {});

PredictionMatrix PredictMatrix(const ExamResultGraph& g,
                               const MleOptions& mle = {});

// Row means of a prediction matrix over the whole bank.
GradeVector AggregateRows(const PredictionMatrix& h, std::string rule_name);

// The structural grade: AggregateRows(PredictMatrix(g)).
GradeVector Grade(const ExamResultGraph& g, const MleOptions& mle = {});

// Quarter of the squared infinity-norm distance between the fitted merits and
// the truth over the fitted vertices, after centring both on that set.
double PerStudentErrorBound(const FitReport& fit, const MeritVector& truth);

// A grading rule maps an exam result graph to grades. Implementations are
// stateless and safe to call concurrently.
class GradingRule {
 public:
  virtual ~GradingRule() = default;
  virtual std::string name() const = 0;
  virtual GradeVector Apply(const ExamResultGraph& g) const = 0;
};

class AveragingRule : public GradingRule {
 public:
  std::string name() const override { return "avg"; }
  GradeVector Apply(const ExamResultGraph& g) const override {
    return SimpleAverage(g);
  }
};

// The component-wise maximum-likelihood rule.
class StructuralRule : public GradingRule {
 public:
  explicit StructuralRule(MleOptions mle = {}) : mle_(std::move(mle)) {}
  std::string name() const override { return "ours"; }
  GradeVector Apply(const ExamResultGraph& g) const override {
    return Grade(g, mle_);
  }

 private:
  MleOptions mle_;
};

// Keeps observed outcomes and predicts every other cell from one MAP fit over
// the whole graph.
class MapRule : public GradingRule {
 public:
  explicit MapRule(PriorSpec prior, MapOptions options = {})
      : prior_(prior), options_(options) {
    prior_.Validate();
  }
  std::string name() const override { return "map"; }
  GradeVector Apply(const ExamResultGraph& g) const override;

 private:
  PriorSpec prior_;
  MapOptions options_;
};

// Every student receives the same grade.
class ConstantRule : public GradingRule {
 public:
  explicit ConstantRule(double value) : value_(value) {}
  std::string name() const override { return "constant"; }
  GradeVector Apply(const ExamResultGraph& g) const override {
    return {std::vector<double>(g.roster().num_students(), value_), name()};
  }

 private:
  double value_;
};

// "avg", "ours" or "map" (the latter needs a prior). Throws ParameterError
// on an unknown name.
std::unique_ptr<GradingRule> MakeRule(const std::string& name,
                                      const MleOptions& mle = {},
                                      const PriorSpec& prior = {});

}  // namespace fairgrade

#endif  // FAIRGRADE_GRADING_H_
