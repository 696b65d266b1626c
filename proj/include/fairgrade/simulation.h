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

#ifndef FAIRGRADE_SIMULATION_H_
#define FAIRGRADE_SIMULATION_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairgrade/estimation.h"
#include "fairgrade/grading.h"
#include "fairgrade/graph.h"
#include "fairgrade/model.h"

namespace fairgrade {

// Runs body(0..count-1) on up to `threads` workers (0 means all cores).
// Callers write results into per-index slots, so the outcome does not depend
// on scheduling.
void ParallelFor(int count, int threads, const std::function<void(int)>& body);

// Pairwise (cascade) summation.
double PairwiseSum(std::span<const double> values);

enum class Estimator { kMonteCarlo, kExactEnumeration };

// Ex-post bias of one rule on one fixed assignment graph.
struct BiasReport {
  std::string rule;
  std::vector<double> expected_grade;  // E_w[alg_i]
  std::vector<double> expected_grade_stderr;
  std::vector<double> benchmark;       // opt_i
  std::vector<double> deviation;       // E_w[alg_i] - opt_i
  std::vector<double> bias;            // deviation squared
  double max_bias = 0.0;
  double avg_bias = 0.0;
  int replications = 0;         // replications that graded successfully
  int failed_replications = 0;  // excluded, never retried
  Estimator estimator = Estimator::kMonteCarlo;
};

// Fills deviation, bias, max_bias and avg_bias from expected_grade and
// benchmark.
void FinalizeBias(BiasReport& report);

// Monte-Carlo ex-post bias of every rule on the same `replications` sampled
// exams (replication r uses the stream DeriveSeed(seed, r)).
std::vector<BiasReport> EstimateExPostBias(
    std::span<const GradingRule* const> rules,
    std::shared_ptr<const TaskAssignmentGraph> g, const MeritVector& u,
    int replications, uint64_t seed, int threads = 1);

BiasReport EstimateExPostBias(const GradingRule& rule,
                              std::shared_ptr<const TaskAssignmentGraph> g,
                              const MeritVector& u, int replications,
                              uint64_t seed, int threads = 1);

// Largest number of assigned pairs the enumeration oracles accept.
inline constexpr int kMaxEnumeratedEdges = 22;

// E_w[alg_i] summed over all 2^|E| outcome vectors. Throws
// InstanceTooLargeError above kMaxEnumeratedEdges.
std::vector<double> ExactExpectedGrade(
    const GradingRule& rule, std::shared_ptr<const TaskAssignmentGraph> g,
    const MeritVector& u);

// ExactExpectedGrade packaged as a BiasReport.
BiasReport ExactExPostBias(const GradingRule& rule,
                           std::shared_ptr<const TaskAssignmentGraph> g,
                           const MeritVector& u);

struct ExAnteReport {
  std::vector<double> expected_grade;  // E_G E_w[alg_i]
  std::vector<double> benchmark;
  double max_abs_gap = 0.0;
  long long graphs = 0;  // assignment graphs enumerated
};

// Exact E_G E_w[alg_i] over every graph GenerateAssignment can return for
// (m, d), each weighted by its probability. Throws InstanceTooLargeError when
// graphs x 2^(n d) exceeds 2^24.
ExAnteReport ExactExAnteGrade(const GradingRule& rule,
                              std::shared_ptr<const Roster> roster, int m,
                              int d, const MeritVector& u);

// Whether simple averaging's E_G E_w[avg_i] equals opt_i within 1e-12 for
// every student.
bool VerifyExAnteFairness(std::shared_ptr<const Roster> roster, int m, int d,
                          const MeritVector& u);

// Expected ex-post error split into ex-post bias and variance, each averaged
// over students and graphs.
struct ErrorDecomposition {
  std::string rule;
  double bias = 0.0;      // unbiased estimate of E_G E_i (E_w alg - opt)^2
  double variance = 0.0;  // unbiased estimate of E_G E_i Var_w(alg)
  double error = 0.0;     // E_G E_i E_w (alg - opt)^2, computed directly
  double error_stderr = 0.0;
  // Plug-in estimates (squared sample deviation, 1/R variance).
  double bias_plugin = 0.0;
  double variance_plugin = 0.0;
  int graphs = 0;
  int replications = 0;
  int failed_replications = 0;
  Estimator estimator = Estimator::kMonteCarlo;
};

std::vector<ErrorDecomposition> DecomposeError(
    std::span<const GradingRule* const> rules,
    std::span<const std::shared_ptr<const TaskAssignmentGraph>> graphs,
    const MeritVector& u, int replications, uint64_t seed, int threads = 1);

ErrorDecomposition DecomposeErrorExact(
    const GradingRule& rule,
    std::span<const std::shared_ptr<const TaskAssignmentGraph>> graphs,
    const MeritVector& u);

// Realized error against the theoretical per-student bound on one result
// graph, meaningful when the graph is strongly connected.
struct BoundCheck {
  bool strongly_connected = false;
  double bound = 0.0;                 // 1/4 |u - u*|_inf^2
  double max_squared_deviation = 0.0; // max_i (alg_i - opt_i)^2
  bool holds = true;                  // max_squared_deviation <= bound + 1e-9
};

BoundCheck CheckErrorBound(const ExamResultGraph& g, const MeritVector& truth,
                           const MleOptions& mle = {});

// Draws question difficulties by inverting the piecewise-linear
// interpolation of an empirical CDF.
class DifficultySampler {
 public:
  // Throws ParameterError on an empty or non-finite sample.
  explicit DifficultySampler(std::vector<double> sample);
  static DifficultySampler Uniform(double lo, double hi) {
    return DifficultySampler({lo, hi});
  }
  // Uniform on the published difficulty range [-3.090, 2.099].
  static DifficultySampler Default() { return Uniform(-3.090, 2.099); }

  double Sample(Rng& rng) const;
  const std::vector<double>& sorted_sample() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

struct RuleStats {
  std::string rule;
  double max_bias = 0.0;
  double max_bias_stderr = 0.0;
  double avg_bias = 0.0;
  double avg_bias_stderr = 0.0;
  int graphs = 0;
  long long replications = 0;
  long long failed_replications = 0;
};

struct SweepPoint {
  int value = 0;
  std::vector<RuleStats> rules;
};

struct SweepResult {
  std::string axis;  // "d" or "m"
  std::vector<SweepPoint> points;
};

struct SweepConfig {
  int graphs = 1;
  int replications = 1;
  uint64_t seed = 0;
  int threads = 1;
};

// Expected max and average ex-post bias for each degree constraint.
SweepResult SweepDegree(std::span<const GradingRule* const> rules,
                        std::shared_ptr<const Roster> roster,
                        const MeritVector& u, int m,
                        std::span<const int> d_values,
                        const SweepConfig& config);

// Expected max and average ex-post bias for each question sample size, with
// fresh difficulties per graph and the benchmark taken over the m sampled
// questions.
SweepResult SweepQuestionSampleSize(std::span<const GradingRule* const> rules,
                                    std::span<const double> abilities,
                                    const DifficultySampler& difficulties,
                                    std::span<const int> m_values, int d,
                                    const SweepConfig& config);

// Complete 0/1 answer matrix.
class AnswerMatrix {
 public:
  AnswerMatrix(std::shared_ptr<const Roster> roster,
               std::vector<uint8_t> cells);
  // Throws ParameterError unless every student answered every question.
  static AnswerMatrix FromCompleteGraph(const ExamResultGraph& g);

  const Roster& roster() const { return *roster_; }
  const std::shared_ptr<const Roster>& roster_ptr() const { return roster_; }
  int at(int i, int j) const {
    return cells_[static_cast<size_t>(i) * roster_->num_questions() + j];
  }
  double RowMean(int i) const;

 private:
  std::shared_ptr<const Roster> roster_;
  std::vector<uint8_t> cells_;
};

struct CvPoint {
  int d1 = 0;
  int d2 = 0;
  std::vector<std::string> rules;
  std::vector<double> mse;
  std::vector<double> mse_stderr;
  std::vector<int> failed_repetitions;
};

struct CvResult {
  std::vector<CvPoint> points;
  // Smallest d2 at which "ours" has a strictly lower MSE than "avg", per d1;
  // nullopt when it never does. Empty unless both rules were evaluated.
  std::map<int, std::optional<int>> threshold;
};

struct CvConfig {
  std::vector<int> d1_values;
  std::vector<int> d2_values;
  int repetitions = 1;
  uint64_t seed = 0;
  int threads = 1;
};

// Subsamples d1 students and d2 questions per student, grades the sample and
// scores each rule against the sampled students' full-row means.
CvResult CrossValidate(const AnswerMatrix& answers,
                       std::span<const GradingRule* const> rules,
                       const CvConfig& config);

// As CrossValidate on freshly simulated complete exams: each repetition draws
// n abilities and `num_questions` difficulties from the prior.
CvResult SimulatedCrossValidate(const PriorSpec& prior,
                                std::span<const GradingRule* const> rules,
                                int n, int num_questions,
                                std::span<const int> d2_values,
                                int repetitions, uint64_t seed,
                                int threads = 1);

}  // namespace fairgrade

#endif  // FAIRGRADE_SIMULATION_H_
