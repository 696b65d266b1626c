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

#include "fairgrade/simulation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <utility>

#include "fairgrade/components.h"
#include "fairgrade/errors.h"

namespace fairgrade {

void ParallelFor(int count, int threads,
                 const std::function<void(int)>& body) {
  if (count <= 0) return;
  if (threads <= 0) {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  threads = std::min(threads, count);
  if (threads == 1) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < count; k = next++) {
      try {
        body(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  // Lowest index first, so the reported error does not depend on timing.
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double PairwiseSum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const size_t half = values.size() / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

namespace {

struct Moments {
  double mean = 0.0;
  double stderr_ = 0.0;  // standard error of the mean
  double sample_var = 0.0;  // 1/(k-1) normalization, 0 when k < 2
};

Moments Summarize(std::span<const double> xs) {
  Moments m;
  if (xs.empty()) {
    m.mean = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  const double k = static_cast<double>(xs.size());
  m.mean = PairwiseSum(xs) / k;
  if (xs.size() < 2) return m;
  std::vector<double> sq(xs.size());
  for (size_t r = 0; r < xs.size(); ++r) {
    sq[r] = (xs[r] - m.mean) * (xs[r] - m.mean);
  }
  m.sample_var = PairwiseSum(sq) / (k - 1.0);
  m.stderr_ = std::sqrt(m.sample_var / k);
  return m;
}

// grades[r][k]: rule k's grade vector on replication r; empty when failed.
using ReplicationGrades = std::vector<std::vector<std::vector<double>>>;

ReplicationGrades SampleAndGrade(std::span<const GradingRule* const> rules,
                                 std::shared_ptr<const TaskAssignmentGraph> g,
                                 const MeritVector& u, int replications,
                                 uint64_t seed, int threads) {
  if (replications < 1) throw ParameterError("replications must be >= 1");
  ReplicationGrades grades(replications,
                           std::vector<std::vector<double>>(rules.size()));
  ParallelFor(replications, threads, [&](int r) {
    const ExamResultGraph exam = SampleExamResult(g, u, DeriveSeed(seed, r));
    for (size_t k = 0; k < rules.size(); ++k) {
      try {
        grades[r][k] = rules[k]->Apply(exam).grades;
      } catch (const Error&) {
        grades[r][k].clear();
      }
    }
  });
  return grades;
}

}  // namespace

void FinalizeBias(BiasReport& report) {
  const size_t n = report.expected_grade.size();
  report.deviation.resize(n);
  report.bias.resize(n);
  for (size_t i = 0; i < n; ++i) {
    report.deviation[i] = report.expected_grade[i] - report.benchmark[i];
    report.bias[i] = report.deviation[i] * report.deviation[i];
  }
  report.max_bias =
      n == 0 ? 0.0 : *std::max_element(report.bias.begin(), report.bias.end());
  report.avg_bias = n == 0 ? 0.0 : PairwiseSum(report.bias) / n;
}

std::vector<BiasReport> EstimateExPostBias(
    std::span<const GradingRule* const> rules,
    std::shared_ptr<const TaskAssignmentGraph> g, const MeritVector& u,
    int replications, uint64_t seed, int threads) {
  const std::vector<double> opt = Benchmark(u, g->roster()).grades;
  const ReplicationGrades grades =
      SampleAndGrade(rules, g, u, replications, seed, threads);
  const int n = g->roster().num_students();

  std::vector<BiasReport> out;
  for (size_t k = 0; k < rules.size(); ++k) {
    BiasReport report;
    report.rule = rules[k]->name();
    report.benchmark = opt;
    report.expected_grade.resize(n);
    report.expected_grade_stderr.resize(n);
    for (int r = 0; r < replications; ++r) {
      (grades[r][k].empty() ? report.failed_replications
                            : report.replications)++;
    }
    std::vector<double> column;
    column.reserve(replications);
    for (int i = 0; i < n; ++i) {
      column.clear();
      for (int r = 0; r < replications; ++r) {
        if (!grades[r][k].empty()) column.push_back(grades[r][k][i]);
      }
      const Moments m = Summarize(column);
      report.expected_grade[i] = m.mean;
      report.expected_grade_stderr[i] = m.stderr_;
    }
    FinalizeBias(report);
    out.push_back(std::move(report));
  }
  return out;
}

BiasReport EstimateExPostBias(const GradingRule& rule,
                              std::shared_ptr<const TaskAssignmentGraph> g,
                              const MeritVector& u, int replications,
                              uint64_t seed, int threads) {
  const GradingRule* rules[] = {&rule};
  return EstimateExPostBias(rules, std::move(g), u, replications, seed,
                            threads)[0];
}

namespace {

// Calls visit(exam, probability) for every outcome vector of g.
void ForEachOutcome(
    const std::shared_ptr<const TaskAssignmentGraph>& g, const MeritVector& u,
    const std::function<void(const ExamResultGraph&, double)>& visit) {
  const int edges = g->num_edges();
  if (edges > kMaxEnumeratedEdges) {
    throw InstanceTooLargeError(
        "exact enumeration needs at most " +
        std::to_string(kMaxEnumeratedEdges) + " assigned pairs, got " +
        std::to_string(edges));
  }
  std::vector<double> p(edges);
  for (int k = 0; k < edges; ++k) {
    const Edge& e = g->edges()[k];
    p[k] = AnswerProbability(u, g->roster(), e.student, e.question);
  }
  const uint32_t count = uint32_t{1} << edges;
  std::vector<uint8_t> outcomes(edges);
  for (uint32_t mask = 0; mask < count; ++mask) {
    double prob = 1.0;
    for (int k = 0; k < edges; ++k) {
      outcomes[k] = (mask >> k) & 1u;
      prob *= outcomes[k] ? p[k] : 1.0 - p[k];
    }
    visit(ExamResultGraph(g, outcomes), prob);
  }
}

}  // namespace

std::vector<double> ExactExpectedGrade(
    const GradingRule& rule, std::shared_ptr<const TaskAssignmentGraph> g,
    const MeritVector& u) {
  std::vector<double> expected(g->roster().num_students(), 0.0);
  double total = 0.0;
  ForEachOutcome(g, u, [&](const ExamResultGraph& exam, double prob) {
    const std::vector<double> grades = rule.Apply(exam).grades;
    for (size_t i = 0; i < grades.size(); ++i) expected[i] += prob * grades[i];
    total += prob;
  });
  // Outcome probabilities sum to 1 only up to rounding.
  for (double& x : expected) x /= total;
  return expected;
}

BiasReport ExactExPostBias(const GradingRule& rule,
                           std::shared_ptr<const TaskAssignmentGraph> g,
                           const MeritVector& u) {
  BiasReport report;
  report.rule = rule.name();
  report.benchmark = Benchmark(u, g->roster()).grades;
  report.expected_grade = ExactExpectedGrade(rule, g, u);
  report.expected_grade_stderr.assign(report.expected_grade.size(), 0.0);
  report.estimator = Estimator::kExactEnumeration;
  FinalizeBias(report);
  return report;
}

namespace {

std::vector<std::vector<int>> Combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> pick(k);
  for (int i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    out.push_back(pick);
    int i = k - 1;
    while (i >= 0 && pick[i] == n - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

double Binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

ExAnteReport ExactExAnteGrade(const GradingRule& rule,
                              std::shared_ptr<const Roster> roster, int m,
                              int d, const MeritVector& u) {
  const int n = roster->num_students();
  const int bank = roster->num_questions();
  if (d < 1 || d > m || m > bank) {
    throw ParameterError("need 1 <= d <= m <= |Q|");
  }
  const double graphs =
      Binomial(bank, m) * std::pow(Binomial(m, d), static_cast<double>(n));
  const double work = graphs * std::ldexp(1.0, n * d);
  if (n * d > kMaxEnumeratedEdges || work > std::ldexp(1.0, 24)) {
    throw InstanceTooLargeError("ex-ante enumeration would visit " +
                                std::to_string(work) + " outcomes");
  }

  ExAnteReport report;
  report.benchmark = Benchmark(u, *roster).grades;
  report.expected_grade.assign(n, 0.0);
  const double weight = 1.0 / graphs;
  const std::vector<std::vector<int>> per_student = Combinations(m, d);
  const int choices = static_cast<int>(per_student.size());
  for (const std::vector<int>& sample : Combinations(bank, m)) {
    std::vector<int> odometer(n, 0);
    while (true) {
      std::vector<Edge> edges;
      for (int i = 0; i < n; ++i) {
        for (int pick : per_student[odometer[i]]) {
          edges.push_back({i, sample[pick]});
        }
      }
      auto g = std::make_shared<const TaskAssignmentGraph>(roster, edges);
      const std::vector<double> e = ExactExpectedGrade(rule, g, u);
      for (int i = 0; i < n; ++i) report.expected_grade[i] += weight * e[i];
      ++report.graphs;
      int pos = 0;
      while (pos < n && ++odometer[pos] == choices) odometer[pos++] = 0;
      if (pos == n) break;
    }
  }
  for (int i = 0; i < n; ++i) {
    report.max_abs_gap =
        std::max(report.max_abs_gap,
                 std::abs(report.expected_grade[i] - report.benchmark[i]));
  }
  return report;
}

bool VerifyExAnteFairness(std::shared_ptr<const Roster> roster, int m, int d,
                          const MeritVector& u) {
  return ExactExAnteGrade(AveragingRule(), std::move(roster), m, d, u)
             .max_abs_gap <= 1e-12;
}

std::vector<ErrorDecomposition> DecomposeError(
    std::span<const GradingRule* const> rules,
    std::span<const std::shared_ptr<const TaskAssignmentGraph>> graphs,
    const MeritVector& u, int replications, uint64_t seed, int threads) {
  if (replications < 2) throw ParameterError("decomposition needs >= 2 reps");
  if (graphs.empty()) throw ParameterError("decomposition needs a graph");
  const size_t num_rules = rules.size();
  // Per graph and rule: student-averaged statistics.
  struct Cell {
    double bias = 0, variance = 0, error = 0, bias_plugin = 0,
           variance_plugin = 0;
    std::vector<double> per_rep_error;  // student-averaged, per replication
    int ok = 0, failed = 0;
  };
  std::vector<std::vector<Cell>> cells(graphs.size(),
                                       std::vector<Cell>(num_rules));
  ParallelFor(static_cast<int>(graphs.size()), threads, [&](int gi) {
    const auto& g = graphs[gi];
    const std::vector<double> opt = Benchmark(u, g->roster()).grades;
    const ReplicationGrades grades =
        SampleAndGrade(rules, g, u, replications, DeriveSeed(seed, gi), 1);
    const int n = g->roster().num_students();
    for (size_t k = 0; k < num_rules; ++k) {
      Cell& cell = cells[gi][k];
      std::vector<int> ok_reps;
      for (int r = 0; r < replications; ++r) {
        if (grades[r][k].empty()) {
          ++cell.failed;
        } else {
          ok_reps.push_back(r);
        }
      }
      cell.ok = static_cast<int>(ok_reps.size());
      if (cell.ok < 2) continue;
      const double reps = cell.ok;
      std::vector<double> b(n), v(n), e(n), bp(n), vp(n), col(cell.ok),
          sq(cell.ok);
      for (int i = 0; i < n; ++i) {
        for (int t = 0; t < cell.ok; ++t) col[t] = grades[ok_reps[t]][k][i];
        const Moments m = Summarize(col);
        for (int t = 0; t < cell.ok; ++t) {
          sq[t] = (col[t] - opt[i]) * (col[t] - opt[i]);
        }
        const double dev = m.mean - opt[i];
        e[i] = PairwiseSum(sq) / reps;
        v[i] = m.sample_var;
        b[i] = dev * dev - m.sample_var / reps;
        vp[i] = m.sample_var * (reps - 1.0) / reps;
        bp[i] = dev * dev;
      }
      cell.bias = PairwiseSum(b) / n;
      cell.variance = PairwiseSum(v) / n;
      cell.error = PairwiseSum(e) / n;
      cell.bias_plugin = PairwiseSum(bp) / n;
      cell.variance_plugin = PairwiseSum(vp) / n;
      cell.per_rep_error.resize(cell.ok);
      for (int t = 0; t < cell.ok; ++t) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
          const double x = grades[ok_reps[t]][k][i] - opt[i];
          s += x * x;
        }
        cell.per_rep_error[t] = s / n;
      }
    }
  });

  std::vector<ErrorDecomposition> out;
  for (size_t k = 0; k < num_rules; ++k) {
    ErrorDecomposition dec;
    dec.rule = rules[k]->name();
    dec.replications = replications;
    std::vector<double> b, v, e, bp, vp, all_errors;
    for (size_t gi = 0; gi < graphs.size(); ++gi) {
      const Cell& cell = cells[gi][k];
      dec.failed_replications += cell.failed;
      if (cell.ok < 2) continue;
      ++dec.graphs;
      b.push_back(cell.bias);
      v.push_back(cell.variance);
      e.push_back(cell.error);
      bp.push_back(cell.bias_plugin);
      vp.push_back(cell.variance_plugin);
      all_errors.insert(all_errors.end(), cell.per_rep_error.begin(),
                        cell.per_rep_error.end());
    }
    const double count = dec.graphs;
    dec.bias = PairwiseSum(b) / count;
    dec.variance = PairwiseSum(v) / count;
    dec.error = PairwiseSum(e) / count;
    dec.bias_plugin = PairwiseSum(bp) / count;
    dec.variance_plugin = PairwiseSum(vp) / count;
    dec.error_stderr = Summarize(all_errors).stderr_;
    out.push_back(std::move(dec));
  }
  return out;
}

ErrorDecomposition DecomposeErrorExact(
    const GradingRule& rule,
    std::span<const std::shared_ptr<const TaskAssignmentGraph>> graphs,
    const MeritVector& u) {
  if (graphs.empty()) throw ParameterError("decomposition needs a graph");
  ErrorDecomposition dec;
  dec.rule = rule.name();
  dec.estimator = Estimator::kExactEnumeration;
  std::vector<double> b, v, e;
  for (const auto& g : graphs) {
    const std::vector<double> opt = Benchmark(u, g->roster()).grades;
    const std::vector<double> mean = ExactExpectedGrade(rule, g, u);
    const size_t n = mean.size();
    std::vector<double> var(n, 0.0), err(n, 0.0);
    double total = 0.0;
    ForEachOutcome(g, u, [&](const ExamResultGraph& exam, double prob) {
      const std::vector<double> x = rule.Apply(exam).grades;
      total += prob;
      for (size_t i = 0; i < n; ++i) {
        var[i] += prob * (x[i] - mean[i]) * (x[i] - mean[i]);
        err[i] += prob * (x[i] - opt[i]) * (x[i] - opt[i]);
      }
    });
    double sb = 0, sv = 0, se = 0;
    for (size_t i = 0; i < n; ++i) {
      sb += (mean[i] - opt[i]) * (mean[i] - opt[i]);
      sv += var[i] / total;
      se += err[i] / total;
    }
    b.push_back(sb / n);
    v.push_back(sv / n);
    e.push_back(se / n);
  }
  dec.graphs = static_cast<int>(graphs.size());
  dec.bias = dec.bias_plugin = PairwiseSum(b) / dec.graphs;
  dec.variance = dec.variance_plugin = PairwiseSum(v) / dec.graphs;
  dec.error = PairwiseSum(e) / dec.graphs;
  return dec;
}

BoundCheck CheckErrorBound(const ExamResultGraph& g, const MeritVector& truth,
                           const MleOptions& mle) {
  BoundCheck check;
  check.strongly_connected = IsStronglyConnected(g);
  if (!check.strongly_connected) return check;
  std::vector<int> all(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) all[v] = v;
  const FitReport fit = MleFit(g, all, mle);
  check.bound = PerStudentErrorBound(fit, truth);
  const std::vector<double> alg = Grade(g, mle).grades;
  const std::vector<double> opt = Benchmark(truth, g.roster()).grades;
  for (size_t i = 0; i < alg.size(); ++i) {
    check.max_squared_deviation =
        std::max(check.max_squared_deviation,
                 (alg[i] - opt[i]) * (alg[i] - opt[i]));
  }
  check.holds = check.max_squared_deviation <= check.bound + 1e-9;
  return check;
}

DifficultySampler::DifficultySampler(std::vector<double> sample)
    : sorted_(std::move(sample)) {
  if (sorted_.empty()) throw ParameterError("difficulty sample is empty");
  for (double x : sorted_) {
    if (!std::isfinite(x)) throw ParameterError("difficulties must be finite");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double DifficultySampler::Sample(Rng& rng) const {
  if (sorted_.size() == 1) return sorted_[0];
  const double pos = rng.Uniform01() * static_cast<double>(sorted_.size() - 1);
  const size_t i = static_cast<size_t>(pos);
  const double t = pos - static_cast<double>(i);
  return sorted_[i] + t * (sorted_[i + 1] - sorted_[i]);
}

namespace {

struct GraphUnit {
  std::vector<BiasReport> reports;
};

SweepPoint ReducePoint(int value, std::span<const GradingRule* const> rules,
                       std::span<const GraphUnit> units) {
  SweepPoint point;
  point.value = value;
  for (size_t k = 0; k < rules.size(); ++k) {
    RuleStats stats;
    stats.rule = rules[k]->name();
    std::vector<double> maxes, avgs;
    for (const GraphUnit& unit : units) {
      const BiasReport& r = unit.reports[k];
      stats.replications += r.replications;
      stats.failed_replications += r.failed_replications;
      if (r.replications == 0) continue;
      maxes.push_back(r.max_bias);
      avgs.push_back(r.avg_bias);
    }
    stats.graphs = static_cast<int>(maxes.size());
    const Moments mx = Summarize(maxes), av = Summarize(avgs);
    stats.max_bias = mx.mean;
    stats.max_bias_stderr = mx.stderr_;
    stats.avg_bias = av.mean;
    stats.avg_bias_stderr = av.stderr_;
    point.rules.push_back(std::move(stats));
  }
  return point;
}

void ValidateSweep(const SweepConfig& config) {
  if (config.graphs < 1 || config.replications < 1) {
    throw ParameterError("graphs and replications must be >= 1");
  }
}

}  // namespace

SweepResult SweepDegree(std::span<const GradingRule* const> rules,
                        std::shared_ptr<const Roster> roster,
                        const MeritVector& u, int m,
                        std::span<const int> d_values,
                        const SweepConfig& config) {
  ValidateSweep(config);
  std::vector<int> ds(d_values.begin(), d_values.end());
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  for (int d : ds) {
    if (d < 1 || d > m || m > roster->num_questions()) {
      throw ParameterError("need 1 <= d <= m <= |Q| for every d");
    }
  }
  const int per_point = config.graphs;
  std::vector<GraphUnit> units(ds.size() * per_point);
  ParallelFor(static_cast<int>(units.size()), config.threads, [&](int k) {
    const int d = ds[k / per_point];
    Rng rng(DeriveSeed(config.seed, d, k % per_point));
    auto g = std::make_shared<const TaskAssignmentGraph>(
        GenerateAssignment(roster, m, d, rng));
    units[k].reports = EstimateExPostBias(rules, g, u, config.replications,
                                          rng.NextU64(), 1);
  });
  SweepResult result{"d", {}};
  for (size_t p = 0; p < ds.size(); ++p) {
    result.points.push_back(ReducePoint(
        ds[p], rules,
        std::span<const GraphUnit>(units).subspan(p * per_point, per_point)));
  }
  return result;
}

SweepResult SweepQuestionSampleSize(std::span<const GradingRule* const> rules,
                                    std::span<const double> abilities,
                                    const DifficultySampler& difficulties,
                                    std::span<const int> m_values, int d,
                                    const SweepConfig& config) {
  ValidateSweep(config);
  if (abilities.empty()) throw ParameterError("need at least one student");
  std::vector<int> ms(m_values.begin(), m_values.end());
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  if (ms.empty() || d < 1 || d > ms.front()) {
    throw ParameterError("need 1 <= d <= min(m)");
  }
  const int n = static_cast<int>(abilities.size());
  const int per_point = config.graphs;
  std::vector<GraphUnit> units(ms.size() * per_point);
  ParallelFor(static_cast<int>(units.size()), config.threads, [&](int k) {
    const int m = ms[k / per_point];
    Rng rng(DeriveSeed(config.seed, m, k % per_point));
    std::vector<double> diffs(m);
    for (double& x : diffs) x = difficulties.Sample(rng);
    auto roster = std::make_shared<const Roster>(Roster::Numbered(n, m));
    const MeritVector u = MeritVector::FromParts(abilities, diffs);
    auto g = std::make_shared<const TaskAssignmentGraph>(
        GenerateAssignment(roster, m, d, rng));
    units[k].reports = EstimateExPostBias(rules, g, u, config.replications,
                                          rng.NextU64(), 1);
  });
  SweepResult result{"m", {}};
  for (size_t p = 0; p < ms.size(); ++p) {
    result.points.push_back(ReducePoint(
        ms[p], rules,
        std::span<const GraphUnit>(units).subspan(p * per_point, per_point)));
  }
  return result;
}

AnswerMatrix::AnswerMatrix(std::shared_ptr<const Roster> roster,
                           std::vector<uint8_t> cells)
    : roster_(std::move(roster)), cells_(std::move(cells)) {
  const size_t expected =
      static_cast<size_t>(roster_->num_students()) * roster_->num_questions();
  if (cells_.size() != expected) {
    throw ParameterError("answer matrix has " + std::to_string(cells_.size()) +
                         " cells, expected " + std::to_string(expected));
  }
  for (uint8_t c : cells_) {
    if (c > 1) throw ParameterError("answers must be 0 or 1");
  }
}

AnswerMatrix AnswerMatrix::FromCompleteGraph(const ExamResultGraph& g) {
  const Roster& roster = g.roster();
  if (g.assignment().num_edges() !=
      roster.num_students() * roster.num_questions()) {
    throw ParameterError(
        "cross-validation needs a complete answer matrix (no NA cells)");
  }
  // Edges are sorted by (student, question), i.e. row-major.
  return AnswerMatrix(g.assignment().roster_ptr(),
                      std::vector<uint8_t>(g.outcomes().begin(),
                                           g.outcomes().end()));
}

double AnswerMatrix::RowMean(int i) const {
  int correct = 0;
  for (int j = 0; j < roster_->num_questions(); ++j) correct += at(i, j);
  return static_cast<double>(correct) / roster_->num_questions();
}

namespace {

// One cross-validation draw: the given students each get d2 random questions.
// Returns each rule's MSE against the full-row means, nullopt on failure.
std::vector<std::optional<double>> CvDraw(
    const AnswerMatrix& answers, const std::vector<int>& students, int d2,
    std::span<const GradingRule* const> rules, Rng& rng) {
  const Roster& full = answers.roster();
  std::vector<std::string> ids;
  for (int s : students) ids.push_back(full.student(s));
  auto roster = std::make_shared<const Roster>(ids, full.questions());
  std::vector<Edge> edges;
  for (size_t k = 0; k < students.size(); ++k) {
    for (int j : rng.SampleWithoutReplacement(full.num_questions(), d2)) {
      edges.push_back({static_cast<int>(k), j});
    }
  }
  auto g = std::make_shared<const TaskAssignmentGraph>(roster, edges);
  std::vector<uint8_t> outcomes;
  for (const Edge& e : g->edges()) {
    outcomes.push_back(
        static_cast<uint8_t>(answers.at(students[e.student], e.question)));
  }
  const ExamResultGraph exam(g, std::move(outcomes));

  std::vector<std::optional<double>> out(rules.size());
  for (size_t k = 0; k < rules.size(); ++k) {
    try {
      const std::vector<double> grades = rules[k]->Apply(exam).grades;
      std::vector<double> sq(students.size());
      for (size_t t = 0; t < students.size(); ++t) {
        const double diff = grades[t] - answers.RowMean(students[t]);
        sq[t] = diff * diff;
      }
      out[k] = PairwiseSum(sq) / static_cast<double>(students.size());
    } catch (const Error&) {
      out[k] = std::nullopt;
    }
  }
  return out;
}

CvPoint ReduceCv(int d1, int d2, std::span<const GradingRule* const> rules,
                 std::span<const std::vector<std::optional<double>>> draws) {
  CvPoint point;
  point.d1 = d1;
  point.d2 = d2;
  for (size_t k = 0; k < rules.size(); ++k) {
    std::vector<double> ok;
    int failed = 0;
    for (const auto& draw : draws) {
      if (draw[k]) {
        ok.push_back(*draw[k]);
      } else {
        ++failed;
      }
    }
    const Moments m = Summarize(ok);
    point.rules.push_back(rules[k]->name());
    point.mse.push_back(m.mean);
    point.mse_stderr.push_back(m.stderr_);
    point.failed_repetitions.push_back(failed);
  }
  return point;
}

void FillThresholds(CvResult& result) {
  for (const CvPoint& p : result.points) {
    auto ours = std::find(p.rules.begin(), p.rules.end(), "ours");
    auto avg = std::find(p.rules.begin(), p.rules.end(), "avg");
    if (ours == p.rules.end() || avg == p.rules.end()) return;
    auto [it, inserted] = result.threshold.try_emplace(p.d1, std::nullopt);
    if (it->second) continue;
    // Points are ordered by ascending d2 within each d1.
    if (p.mse[ours - p.rules.begin()] < p.mse[avg - p.rules.begin()]) {
      it->second = p.d2;
    }
  }
}

std::vector<int> SortedUnique(std::span<const int> xs) {
  std::vector<int> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

CvResult CrossValidate(const AnswerMatrix& answers,
                       std::span<const GradingRule* const> rules,
                       const CvConfig& config) {
  const int n = answers.roster().num_students();
  const int q = answers.roster().num_questions();
  const std::vector<int> d1s = SortedUnique(config.d1_values);
  const std::vector<int> d2s = SortedUnique(config.d2_values);
  if (config.repetitions < 1) throw ParameterError("repetitions must be >= 1");
  if (d1s.empty() || d2s.empty()) throw ParameterError("empty d1/d2 grid");
  if (d1s.front() < 1 || d1s.back() > n || d2s.front() < 1 || d2s.back() > q) {
    throw ParameterError("need 1 <= d1 <= n and 1 <= d2 <= |Q|");
  }
  const int reps = config.repetitions;
  const size_t points = d1s.size() * d2s.size();
  std::vector<std::vector<std::optional<double>>> draws(points * reps);
  ParallelFor(static_cast<int>(draws.size()), config.threads, [&](int k) {
    const int point = k / reps, rep = k % reps;
    const int d1 = d1s[point / d2s.size()], d2 = d2s[point % d2s.size()];
    const uint64_t students_path[] = {0, static_cast<uint64_t>(d1),
                                      static_cast<uint64_t>(rep)};
    Rng student_rng(DeriveSeed(config.seed, students_path));
    std::vector<int> students = student_rng.SampleWithoutReplacement(n, d1);
    std::sort(students.begin(), students.end());
    const uint64_t questions_path[] = {1, static_cast<uint64_t>(d1),
                                       static_cast<uint64_t>(d2),
                                       static_cast<uint64_t>(rep)};
    Rng question_rng(DeriveSeed(config.seed, questions_path));
    draws[k] = CvDraw(answers, students, d2, rules, question_rng);
  });
  CvResult result;
  for (size_t p = 0; p < points; ++p) {
    result.points.push_back(ReduceCv(
        d1s[p / d2s.size()], d2s[p % d2s.size()], rules,
        std::span<const std::vector<std::optional<double>>>(draws).subspan(
            p * reps, reps)));
  }
  FillThresholds(result);
  return result;
}

CvResult SimulatedCrossValidate(const PriorSpec& prior,
                                std::span<const GradingRule* const> rules,
                                int n, int num_questions,
                                std::span<const int> d2_values,
                                int repetitions, uint64_t seed, int threads) {
  prior.Validate();
  const std::vector<int> d2s = SortedUnique(d2_values);
  if (n < 1 || num_questions < 1 || repetitions < 1 || d2s.empty() ||
      d2s.front() < 1 || d2s.back() > num_questions) {
    throw ParameterError("need n, |Q|, repetitions >= 1 and 1 <= d2 <= |Q|");
  }
  auto roster =
      std::make_shared<const Roster>(Roster::Numbered(n, num_questions));
  auto complete = std::make_shared<const TaskAssignmentGraph>(
      TaskAssignmentGraph::Complete(roster));
  std::vector<int> everyone(n);
  for (int i = 0; i < n; ++i) everyone[i] = i;

  std::vector<std::vector<std::optional<double>>> draws(d2s.size() *
                                                        repetitions);
  ParallelFor(static_cast<int>(draws.size()), threads, [&](int k) {
    const int d2 = d2s[k / repetitions], rep = k % repetitions;
    // The simulated exam depends on the repetition only, so every d2 sees
    // the same exams.
    const uint64_t exam_path[] = {0, static_cast<uint64_t>(rep)};
    Rng exam_rng(DeriveSeed(seed, exam_path));
    std::vector<double> abilities(n), difficulties(num_questions);
    for (double& x : abilities) {
      x = exam_rng.Normal(prior.student_mean, prior.student_std);
    }
    for (double& x : difficulties) {
      x = exam_rng.Normal(prior.question_mean, prior.question_std);
    }
    const MeritVector u = MeritVector::FromParts(abilities, difficulties);
    const AnswerMatrix answers = AnswerMatrix::FromCompleteGraph(
        SampleExamResult(complete, u, exam_rng));
    const uint64_t question_path[] = {1, static_cast<uint64_t>(d2),
                                      static_cast<uint64_t>(rep)};
    Rng question_rng(DeriveSeed(seed, question_path));
    draws[k] = CvDraw(answers, everyone, d2, rules, question_rng);
  });
  CvResult result;
  for (size_t p = 0; p < d2s.size(); ++p) {
    result.points.push_back(ReduceCv(
        n, d2s[p], rules,
        std::span<const std::vector<std::optional<double>>>(draws).subspan(
            p * repetitions, repetitions)));
  }
  FillThresholds(result);
  return result;
}

}  // namespace fairgrade
