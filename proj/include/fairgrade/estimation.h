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

#ifndef FAIRGRADE_ESTIMATION_H_
#define FAIRGRADE_ESTIMATION_H_

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fairgrade/errors.h"
#include "fairgrade/graph.h"
#include "fairgrade/model.h"

namespace fairgrade {

struct FitReport {
  // Covers exactly the fitted vertices.
  MeritVector merits;
  std::vector<int> vertices;
  int iterations = 0;
  // Infinity-norm of the first-order condition defect at `merits`.
  double residual = 0.0;
  bool converged = false;
};

// Thrown when the iteration budget runs out. Carries the best iterate.
class NonConvergenceError : public NumericError {
 public:
  NonConvergenceError(const std::string& message, FitReport best,
                      int component = -1)
      : NumericError(message), best_(std::move(best)), component_(component) {}

  const FitReport& best() const { return best_; }
  // Component id of the failed fit, -1 when not fitting a component.
  int component() const { return component_; }

 private:
  FitReport best_;
  int component_;
};

struct MleOptions {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  // Starting merits; all zero when unset.
  std::optional<MeritVector> initial;
  // Called with every iterate, starting with the initial point.
  std::function<void(int iteration, const MeritVector& merits)> on_iterate;
};

// For each vertex v of `vertices`: wins of v minus its expected wins, counting
// only result edges with both endpoints in `vertices`. Returns the
// infinity-norm.
double LikelihoodResidual(const ExamResultGraph& g,
                          std::span<const int> vertices, const MeritVector& u);

// Maximum-likelihood merits of a strongly connected vertex set, computed with
// the minorization-maximization fixed point
//   gamma_v <- W_v / sum_{w ~ v} 1 / (gamma_v + gamma_w),  gamma = e^u,
// applied alternately to the student block and the question block. Only edges
// inside `vertices` enter the likelihood. The result is MeanZero over the set.
//
// Throws NotStronglyConnectedError when the induced subgraph is not strongly
// connected, NonConvergenceError when the residual stays above tolerance after
// max_iterations.
FitReport MleFit(const ExamResultGraph& g, std::span<const int> vertices,
                 const MleOptions& options = {});

struct PriorSpec {
  double student_mean = 0.0;
  double student_std = 1.0;
  double question_mean = 0.0;
  double question_std = 1.0;

  // Throws ParameterError unless both stds are positive and finite.
  void Validate() const;
};

struct MapOptions {
  double tolerance = 1e-8;
  int max_iterations = 200;
};

// Gradient of the log-posterior (log-likelihood plus Gaussian log-prior) with
// respect to every merit.
std::vector<double> LogPosteriorGradient(const ExamResultGraph& g,
                                         const PriorSpec& prior,
                                         const MeritVector& u);

// Maximum a posteriori merits over every vertex of the roster, by damped
// Newton with backtracking. The residual is the gradient infinity-norm.
FitReport MapFit(const ExamResultGraph& g, const PriorSpec& prior,
                 const MapOptions& options = {});

}  // namespace fairgrade

#endif  // FAIRGRADE_ESTIMATION_H_
