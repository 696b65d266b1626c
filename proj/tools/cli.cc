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

#include "cli.h"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "fairgrade/components.h"
#include "fairgrade/errors.h"
#include "fairgrade/estimation.h"
#include "fairgrade/grading.h"
#include "fairgrade/graph.h"
#include "fairgrade/io.h"
#include "fairgrade/model.h"
#include "fairgrade/random.h"
#include "fairgrade/simulation.h"
#include "json.hpp"

namespace fairgrade::cli {
namespace {

using Json = nlohmann::ordered_json;
using AssignmentPtr = std::shared_ptr<const TaskAssignmentGraph>;

// Seed streams split off the master seed.
constexpr uint64_t kMeritStream = 0;
constexpr uint64_t kGraphStream = 1;
constexpr uint64_t kBiasStream = 2;
constexpr uint64_t kDecompositionStream = 3;

// Every option of every subcommand; each subcommand binds the subset it uses.
struct Settings {
  std::string input;
  std::string format = "dense-csv";
  std::vector<std::string> rules;
  uint64_t seed = 0;
  int threads = 0;
  std::string output_dir;
  double tolerance = 1e-8;
  int max_iterations = 10000;
  PriorSpec prior;
  double map_tolerance = 1e-8;
  int map_max_iterations = 200;
  std::string estimator = "mle";

  std::string merits_path;
  std::string difficulties_path;
  int students = 0;
  int questions = 0;
  std::vector<double> ability_range{-1.486, 1.149};
  std::vector<double> difficulty_range{-3.090, 2.099};
  bool constant_merits = false;

  int m = 0;
  int d = 0;
  std::string m_list;
  std::string d_list;
  std::string d1_list;
  std::string d2_list;
  int graphs = 1;
  int replications = 100;
  bool exact = false;

  MleOptions Mle() const {
    MleOptions options;
    options.tolerance = tolerance;
    options.max_iterations = max_iterations;
    return options;
  }
};

// Collects report files under one directory.
class Reports {
 public:
  explicit Reports(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void Write(const std::string& name,
             const std::function<void(std::ostream&)>& body) {
    std::ostringstream buffer;
    body(buffer);
    std::ofstream file(dir_ / name, std::ios::binary | std::ios::trunc);
    file << buffer.str();
    if (!file) {
      throw std::runtime_error("cannot write " + (dir_ / name).string());
    }
    files_.push_back(name);
  }

  void WriteJson(const std::string& name, const Json& value) {
    Write(name, [&](std::ostream& out) { out << value.dump(2) << '\n'; });
  }

  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

int ParseInt(const std::string& token, const std::string& whole) {
  int value = 0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw ParameterError("bad integer list '" + whole + "'");
  }
  return value;
}

// ---------------------------------------------------------------------------
// Option groups.

void AddOutputOptions(CLI::App* sub, Settings& s) {
  sub->add_option("--threads", s.threads,
                  "Worker threads, 0 for all cores (results do not depend "
                  "on it)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--output-dir", s.output_dir,
                  "Report directory (default: $FAIRGRADE_OUTPUT_DIR or "
                  "fairgrade-out)");
}

void AddSeed(CLI::App* sub, Settings& s) {
  sub->add_option("--seed", s.seed, "Master seed")->required();
}

void AddInput(CLI::App* sub, Settings& s) {
  sub->add_option("--input", s.input, "Exam result file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--format", s.format, "dense-csv or edge-list")
      ->check(CLI::IsMember({"dense-csv", "edge-list"}));
}

void AddMle(CLI::App* sub, Settings& s) {
  sub->add_option("--tol", s.tolerance, "MLE likelihood-equation tolerance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", s.max_iterations, "MLE iteration budget")
      ->check(CLI::PositiveNumber);
}

void AddPrior(CLI::App* sub, Settings& s) {
  sub->add_option("--student-mean", s.prior.student_mean);
  sub->add_option("--student-std", s.prior.student_std)
      ->check(CLI::PositiveNumber);
  sub->add_option("--question-mean", s.prior.question_mean);
  sub->add_option("--question-std", s.prior.question_std)
      ->check(CLI::PositiveNumber);
}

void AddRules(CLI::App* sub, Settings& s, std::vector<std::string> fallback) {
  s.rules = std::move(fallback);
  sub->add_option("--rule", s.rules, "Grading rules: avg, ours, map")
      ->check(CLI::IsMember({"avg", "ours", "map"}))
      ->delimiter(',');
}

void AddMeritSource(CLI::App* sub, Settings& s) {
  sub->add_option("--merits", s.merits_path,
                  "True merits as vertex,kind,merit CSV")
      ->check(CLI::ExistingFile);
  sub->add_option("--students", s.students,
                  "Number of students when merits are drawn")
      ->check(CLI::PositiveNumber);
  sub->add_option("--questions", s.questions,
                  "Bank size when merits are drawn")
      ->check(CLI::PositiveNumber);
  sub->add_option("--ability-range", s.ability_range,
                  "Uniform ability range for drawn merits")
      ->expected(2)
      ->delimiter(',');
  sub->add_option("--difficulty-range", s.difficulty_range,
                  "Uniform difficulty range for drawn merits")
      ->expected(2)
      ->delimiter(',');
  sub->add_flag("--constant-merits", s.constant_merits,
                "Give every vertex merit 0");
}

void AddCounts(CLI::App* sub, Settings& s) {
  sub->add_option("--graphs", s.graphs, "Assignment graphs per point")
      ->check(CLI::PositiveNumber);
  sub->add_option("--reps", s.replications, "Exam samples per graph")
      ->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------------------
// Shared pipeline pieces.

struct Truth {
  std::shared_ptr<const Roster> roster;
  MeritVector merits;
};

double UniformIn(const std::vector<double>& range, Rng& rng) {
  return range[0] + (range[1] - range[0]) * rng.Uniform01();
}

void CheckRange(const std::vector<double>& range, const std::string& name) {
  if (range.size() != 2 || !(range[0] <= range[1])) {
    throw ParameterError(name + " must be lo,hi with lo <= hi");
  }
}

Truth LoadTruth(const Settings& s) {
  if (!s.merits_path.empty()) {
    MeritTable table = ReadMerits(s.merits_path);
    return {table.roster, table.merits};
  }
  if (s.students < 1 || s.questions < 1) {
    throw ParameterError("give --merits or both --students and --questions");
  }
  CheckRange(s.ability_range, "--ability-range");
  CheckRange(s.difficulty_range, "--difficulty-range");
  auto roster = std::make_shared<const Roster>(
      Roster::Numbered(s.students, s.questions));
  std::vector<double> values(roster->num_vertices(), 0.0);
  if (!s.constant_merits) {
    Rng rng(DeriveSeed(s.seed, kMeritStream));
    for (int v = 0; v < roster->num_vertices(); ++v) {
      values[v] = UniformIn(roster->IsStudentVertex(v) ? s.ability_range
                                                       : s.difficulty_range,
                            rng);
    }
  }
  return {roster, MeritVector(values)};
}

struct RuleSet {
  std::vector<std::unique_ptr<GradingRule>> owned;
  std::vector<const GradingRule*> pointers;
};

RuleSet MakeRules(const Settings& s) {
  RuleSet set;
  std::vector<std::string> seen;
  for (const std::string& name : s.rules) {
    if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
    seen.push_back(name);
    set.owned.push_back(MakeRule(name, s.Mle(), s.prior));
    set.pointers.push_back(set.owned.back().get());
  }
  if (set.pointers.empty()) throw ParameterError("no grading rule selected");
  return set;
}

Json FitJson(const Roster& roster, int component, const FitReport& fit) {
  Json vertices = Json::array();
  for (int v : fit.vertices) vertices.push_back(roster.VertexName(v));
  return {{"component", component},
          {"vertices", vertices},
          {"iterations", fit.iterations},
          {"residual", fit.residual},
          {"converged", fit.converged},
          {"merit_span", MeritSpan(fit.merits)}};
}

Json RuleStatsJson(const RuleStats& r) {
  return {{"rule", r.rule},
          {"max_bias", r.max_bias},
          {"max_bias_stderr", r.max_bias_stderr},
          {"avg_bias", r.avg_bias},
          {"avg_bias_stderr", r.avg_bias_stderr},
          {"graphs", r.graphs},
          {"replications", r.replications},
          {"failed_replications", r.failed_replications}};
}

Json SweepJson(const SweepResult& sweep) {
  Json points = Json::array();
  for (const SweepPoint& p : sweep.points) {
    Json rules = Json::array();
    for (const RuleStats& r : p.rules) rules.push_back(RuleStatsJson(r));
    points.push_back({{sweep.axis, p.value}, {"rules", rules}});
  }
  return {{"axis", sweep.axis}, {"points", points}};
}

Json CvJson(const CvResult& cv) {
  Json points = Json::array();
  for (const CvPoint& p : cv.points) {
    Json rules = Json::array();
    for (size_t k = 0; k < p.rules.size(); ++k) {
      rules.push_back({{"rule", p.rules[k]},
                       {"mse", p.mse[k]},
                       {"mse_stderr", p.mse_stderr[k]},
                       {"failed_repetitions", p.failed_repetitions[k]}});
    }
    points.push_back({{"d1", p.d1}, {"d2", p.d2}, {"rules", rules}});
  }
  Json thresholds = Json::array();
  for (const auto& [d1, d2] : cv.threshold) {
    thresholds.push_back({{"d1", d1}, {"d2", d2 ? Json(*d2) : Json(nullptr)}});
  }
  return {{"points", points}, {"thresholds", thresholds}};
}

void WriteThresholds(std::ostream& out, const CvResult& cv) {
  out << "d1,threshold\n";
  for (const auto& [d1, d2] : cv.threshold) {
    out << d1 << ',' << (d2 ? std::to_string(*d2) : "NA") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Commands. Each writes its reports and returns an exit status.

int RunGrade(const Settings& s, Reports& reports, Json& summary) {
  const ExamResultGraph g = ReadExam(s.input, ParseExamFormat(s.format));
  std::vector<GradeVector> grades;
  std::optional<Prediction> prediction;
  const RuleSet rules = MakeRules(s);
  for (const GradingRule* rule : rules.pointers) {
    if (rule->name() == "ours") {
      prediction = Predict(g, s.Mle());
      grades.push_back(AggregateRows(prediction->matrix, "ours"));
    } else {
      grades.push_back(rule->Apply(g));
    }
  }
  reports.Write("grades.csv",
                [&](std::ostream& out) { WriteGrades(out, g.roster(), grades); });
  summary["students"] = g.roster().num_students();
  summary["questions"] = g.roster().num_questions();
  summary["assigned_pairs"] = g.assignment().num_edges();
  if (prediction) {
    reports.Write("predictions.csv", [&](std::ostream& out) {
      WritePredictionCsv(out, g.roster(), prediction->matrix);
    });
    reports.Write("cases.csv", [&](std::ostream& out) {
      WriteCaseTagCsv(out, g.roster(), prediction->matrix);
    });
    Json fits = Json::array();
    for (const auto& [c, fit] : prediction->fits) {
      fits.push_back(FitJson(g.roster(), c, fit));
    }
    summary["components"] = prediction->components.num_components();
    summary["fits"] = fits;
  }
  return kOk;
}

int RunFit(const Settings& s, Reports& reports, Json& summary) {
  const ExamResultGraph g = ReadExam(s.input, ParseExamFormat(s.format));
  const Roster& roster = g.roster();
  summary["estimator"] = s.estimator;
  if (s.estimator == "map") {
    s.prior.Validate();
    const FitReport fit =
        MapFit(g, s.prior, MapOptions{s.map_tolerance, s.map_max_iterations});
    reports.Write("merits.csv", [&](std::ostream& out) {
      WriteMerits(out, roster, fit.merits);
    });
    summary["fit"] = FitJson(roster, -1, fit);
    return kOk;
  }
  const ComponentStructure cs = StronglyConnectedComponents(g);
  MeritVector merits(g.num_vertices());
  Json fits = Json::array();
  for (int c = 0; c < cs.num_components(); ++c) {
    const std::span<const int> members = cs.component(c);
    if (members.size() < 2) continue;
    FitReport fit;
    try {
      fit = MleFit(g, members, s.Mle());
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError(e.what(), e.best(), c);
    }
    for (int v : fit.vertices) merits.Set(v, fit.merits.at(v));
    fits.push_back(FitJson(roster, c, fit));
  }
  reports.Write("merits.csv",
                [&](std::ostream& out) { WriteMerits(out, roster, merits); });
  reports.Write("components.csv", [&](std::ostream& out) {
    out << "vertex,kind,component\n";
    for (int v = 0; v < roster.num_vertices(); ++v) {
      out << roster.VertexName(v) << ','
          << (roster.IsStudentVertex(v) ? "student" : "question") << ','
          << cs.component_of(v) << '\n';
    }
  });
  summary["components"] = cs.num_components();
  summary["strongly_connected"] = cs.num_components() == 1;
  summary["fits"] = fits;
  return kOk;
}

std::vector<AssignmentPtr> DrawGraphs(const Settings& s,
                                      const std::shared_ptr<const Roster>& roster,
                                      int m, int d) {
  std::vector<AssignmentPtr> graphs;
  for (int k = 0; k < s.graphs; ++k) {
    Rng rng(DeriveSeed(s.seed, kGraphStream, static_cast<uint64_t>(k)));
    graphs.push_back(std::make_shared<const TaskAssignmentGraph>(
        GenerateAssignment(roster, m, d, rng)));
  }
  return graphs;
}

int RunSimulateBias(const Settings& s, Reports& reports, Json& summary) {
  const Truth truth = LoadTruth(s);
  const int m = s.m > 0 ? s.m : truth.roster->num_questions();
  const std::vector<AssignmentPtr> graphs =
      DrawGraphs(s, truth.roster, m, s.d);
  const RuleSet rules = MakeRules(s);

  std::vector<BiasReport> bias;
  std::vector<ErrorDecomposition> decomposition;
  if (s.exact) {
    for (const GradingRule* rule : rules.pointers) {
      bias.push_back(ExactExPostBias(*rule, graphs[0], truth.merits));
      decomposition.push_back(
          DecomposeErrorExact(*rule, graphs, truth.merits));
    }
  } else {
    if (s.replications < 2) {
      throw ParameterError("--reps must be at least 2 for the decomposition");
    }
    bias = EstimateExPostBias(rules.pointers, graphs[0], truth.merits,
                              s.replications,
                              DeriveSeed(s.seed, kBiasStream), s.threads);
    decomposition = DecomposeError(
        rules.pointers, graphs, truth.merits, s.replications,
        DeriveSeed(s.seed, kDecompositionStream), s.threads);
  }
  reports.Write("bias.csv", [&](std::ostream& out) {
    WriteBiasCsv(out, *truth.roster, bias);
  });
  reports.Write("decomposition.csv", [&](std::ostream& out) {
    WriteDecompositionCsv(out, decomposition);
  });
  Json rows = Json::array();
  for (const BiasReport& r : bias) {
    rows.push_back({{"rule", r.rule},
                    {"max_bias", r.max_bias},
                    {"avg_bias", r.avg_bias},
                    {"replications", r.replications},
                    {"failed_replications", r.failed_replications}});
  }
  Json dec = Json::array();
  for (const ErrorDecomposition& e : decomposition) {
    dec.push_back({{"rule", e.rule},
                   {"bias", e.bias},
                   {"variance", e.variance},
                   {"error", e.error},
                   {"error_stderr", e.error_stderr},
                   {"bias_plugin", e.bias_plugin},
                   {"variance_plugin", e.variance_plugin},
                   {"graphs", e.graphs},
                   {"failed_replications", e.failed_replications}});
  }
  summary["estimator"] = s.exact ? "exact" : "monte-carlo";
  summary["merit_span"] = MeritSpan(truth.merits);
  summary["ex_post_bias"] = rows;
  summary["decomposition"] = dec;
  return kOk;
}

int RunSweepDegree(const Settings& s, Reports& reports, Json& summary) {
  const Truth truth = LoadTruth(s);
  const int m = s.m > 0 ? s.m : truth.roster->num_questions();
  const std::vector<int> ds = ParseIntList(s.d_list);
  const RuleSet rules = MakeRules(s);
  const SweepResult sweep = SweepDegree(
      rules.pointers, truth.roster, truth.merits, m, ds,
      SweepConfig{s.graphs, s.replications, DeriveSeed(s.seed, kBiasStream),
                  s.threads});
  reports.Write("sweep.csv",
                [&](std::ostream& out) { WriteSweepCsv(out, sweep); });
  summary["sweep"] = SweepJson(sweep);
  return kOk;
}

int RunSweepBank(const Settings& s, Reports& reports, Json& summary) {
  std::vector<double> abilities;
  std::optional<DifficultySampler> sampler;
  if (!s.merits_path.empty()) {
    const MeritTable table = ReadMerits(s.merits_path);
    for (int i = 0; i < table.roster->num_students(); ++i) {
      abilities.push_back(table.merits.at(table.roster->StudentVertex(i)));
    }
  } else {
    if (s.students < 1) {
      throw ParameterError("give --merits or --students");
    }
    CheckRange(s.ability_range, "--ability-range");
    Rng rng(DeriveSeed(s.seed, kMeritStream));
    for (int i = 0; i < s.students; ++i) {
      abilities.push_back(s.constant_merits ? 0.0
                                            : UniformIn(s.ability_range, rng));
    }
  }
  if (!s.difficulties_path.empty()) {
    const MeritTable table = ReadMerits(s.difficulties_path);
    std::vector<double> sample;
    for (int j = 0; j < table.roster->num_questions(); ++j) {
      sample.push_back(table.merits.at(table.roster->QuestionVertex(j)));
    }
    sampler.emplace(std::move(sample));
  } else if (s.constant_merits) {
    sampler.emplace(std::vector<double>{0.0});
  } else {
    CheckRange(s.difficulty_range, "--difficulty-range");
    sampler.emplace(DifficultySampler::Uniform(s.difficulty_range[0],
                                               s.difficulty_range[1]));
  }
  const std::vector<int> ms = ParseIntList(s.m_list);
  const RuleSet rules = MakeRules(s);
  const SweepResult sweep = SweepQuestionSampleSize(
      rules.pointers, abilities, *sampler, ms, s.d,
      SweepConfig{s.graphs, s.replications, DeriveSeed(s.seed, kBiasStream),
                  s.threads});
  reports.Write("sweep.csv",
                [&](std::ostream& out) { WriteSweepCsv(out, sweep); });
  summary["sweep"] = SweepJson(sweep);
  return kOk;
}

int RunCv(const Settings& s, Reports& reports, Json& summary) {
  const ExamResultGraph g = ReadExam(s.input, ParseExamFormat(s.format));
  std::optional<AnswerMatrix> answers;
  try {
    answers.emplace(AnswerMatrix::FromCompleteGraph(g));
  } catch (const ParameterError& e) {
    throw DataFormatError(std::string("cross-validation needs a complete "
                                      "answer matrix: ") + e.what());
  }
  const RuleSet rules = MakeRules(s);
  CvConfig config;
  config.d1_values = ParseIntList(s.d1_list);
  config.d2_values = ParseIntList(s.d2_list);
  config.repetitions = s.replications;
  config.seed = DeriveSeed(s.seed, kBiasStream);
  config.threads = s.threads;
  const CvResult cv = CrossValidate(*answers, rules.pointers, config);
  reports.Write("cv.csv", [&](std::ostream& out) { WriteCvCsv(out, cv); });
  reports.Write("thresholds.csv",
                [&](std::ostream& out) { WriteThresholds(out, cv); });
  summary["cv"] = CvJson(cv);
  return kOk;
}

int RunCvSim(const Settings& s, Reports& reports, Json& summary) {
  if (s.students < 1 || s.questions < 1) {
    throw ParameterError("cv-sim needs --students and --questions");
  }
  const RuleSet rules = MakeRules(s);
  const std::vector<int> d2s = ParseIntList(s.d2_list);
  const CvResult cv = SimulatedCrossValidate(
      s.prior, rules.pointers, s.students, s.questions, d2s, s.replications,
      DeriveSeed(s.seed, kBiasStream), s.threads);
  reports.Write("cv.csv", [&](std::ostream& out) { WriteCvCsv(out, cv); });
  reports.Write("thresholds.csv",
                [&](std::ostream& out) { WriteThresholds(out, cv); });
  summary["cv"] = CvJson(cv);
  return kOk;
}

int RunVerify(const Settings& s, Reports& reports, Json& summary) {
  const Truth truth = LoadTruth(s);
  const int m = s.m > 0 ? s.m : truth.roster->num_questions();
  bool all_pass = true;

  Json ex_ante = {{"check", "ex-ante-fairness"}};
  try {
    const ExAnteReport avg =
        ExactExAnteGrade(AveragingRule(), truth.roster, m, s.d, truth.merits);
    const ExAnteReport ours = ExactExAnteGrade(StructuralRule(s.Mle()),
                                               truth.roster, m, s.d,
                                               truth.merits);
    const bool pass = avg.max_abs_gap <= 1e-12;
    all_pass = all_pass && pass;
    ex_ante["status"] = pass ? "pass" : "fail";
    ex_ante["graphs"] = avg.graphs;
    ex_ante["avg_max_abs_gap"] = avg.max_abs_gap;
    // Measured only; no fairness claim exists for the structural rule.
    ex_ante["ours_max_abs_gap"] = ours.max_abs_gap;
  } catch (const InstanceTooLargeError& e) {
    ex_ante["status"] = "skipped";
    ex_ante["reason"] = e.what();
  }

  struct Slot {
    std::optional<BoundCheck> check;
    bool failed = false;
  };
  std::vector<Slot> slots(s.replications);
  ParallelFor(s.replications, s.threads, [&](int r) {
    Rng rng(DeriveSeed(s.seed, kGraphStream, static_cast<uint64_t>(r)));
    auto a = std::make_shared<const TaskAssignmentGraph>(
        GenerateAssignment(truth.roster, m, s.d, rng));
    try {
      slots[r].check =
          CheckErrorBound(SampleExamResult(a, truth.merits, rng), truth.merits,
                          s.Mle());
    } catch (const NumericError&) {
      slots[r].failed = true;
    }
  });
  int connected = 0, holds = 0, failed = 0;
  double worst_excess = -INFINITY;
  for (const Slot& slot : slots) {
    if (slot.failed) {
      ++failed;
      continue;
    }
    if (!slot.check->strongly_connected) continue;
    ++connected;
    holds += slot.check->holds;
    worst_excess = std::max(
        worst_excess, slot.check->max_squared_deviation - slot.check->bound);
  }
  const bool bound_pass = holds == connected;
  all_pass = all_pass && bound_pass;
  Json bound = {{"check", "error-bound"},
                {"status", bound_pass ? "pass" : "fail"},
                {"replications", s.replications},
                {"strongly_connected", connected},
                {"holds", holds},
                {"failed_fits", failed},
                {"connectivity_fraction",
                 static_cast<double>(connected) / s.replications}};
  if (connected > 0) bound["worst_excess"] = worst_excess;

  summary["checks"] = Json::array({ex_ante, bound});
  summary["pass"] = all_pass;
  reports.WriteJson("verify.json", summary["checks"]);
  return all_pass ? kOk : kCheckFailed;
}

// The values every option of `sub` ended up with, for the manifest. Options
// that cannot change results (threads, output location) are left out so
// manifests stay byte-identical across machines.
Json EchoConfig(const CLI::App* sub) {
  Json config = Json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_lnames().empty()
                                 ? opt->get_name()
                                 : opt->get_lnames().front();
    if (name == "help" || name == "threads" || name == "output-dir") continue;
    std::vector<std::string> values = opt->count() > 0
                                          ? opt->results()
                                          : std::vector<std::string>{};
    if (values.empty()) {
      std::string fallback = opt->get_default_str();
      if (fallback.empty()) continue;
      if (fallback.size() >= 2 && fallback.front() == '[' &&
          fallback.back() == ']') {
        // Container defaults print as "[a,b]".
        std::stringstream items(fallback.substr(1, fallback.size() - 2));
        for (std::string item; std::getline(items, item, ',');) {
          values.push_back(item);
        }
      } else {
        values.push_back(fallback);
      }
    }
    config[name] = values.size() == 1 && opt->get_expected_max() <= 1
                       ? Json(values[0])
                       : Json(values);
  }
  return config;
}

}  // namespace

std::vector<int> ParseIntList(const std::string& text) {
  std::vector<int> values;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    token.erase(std::remove_if(token.begin(), token.end(), ::isspace),
                token.end());
    const size_t dots = token.find("..");
    if (dots == std::string::npos) {
      values.push_back(ParseInt(token, text));
      continue;
    }
    const size_t colon = token.find(':', dots);
    const int lo = ParseInt(token.substr(0, dots), text);
    const int hi = ParseInt(
        token.substr(dots + 2, colon == std::string::npos ? std::string::npos
                                                          : colon - dots - 2),
        text);
    const int step = colon == std::string::npos
                         ? 1
                         : ParseInt(token.substr(colon + 1), text);
    if (step < 1 || lo > hi) {
      throw ParameterError("bad range '" + token + "' in '" + text + "'");
    }
    for (int v = lo; v <= hi; v += step) values.push_back(v);
  }
  if (values.empty()) throw ParameterError("empty integer list");
  return values;
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Fair grading of randomized exams under the BTL model",
               "fairgrade"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "",
                 "TOML/INI file with one [subcommand] section of options");
  app.require_subcommand(1, 1);
  app.option_defaults()->always_capture_default();

  Settings s;
  if (const char* dir = std::getenv("FAIRGRADE_OUTPUT_DIR")) {
    s.output_dir = dir;
  } else {
    s.output_dir = "fairgrade-out";
  }

  using Command = std::function<int(const Settings&, Reports&, Json&)>;
  std::vector<std::pair<CLI::App*, Command>> commands;
  auto add = [&](const std::string& name, const std::string& about,
                 Command run) {
    CLI::App* sub = app.add_subcommand(name, about);
    AddOutputOptions(sub, s);
    commands.emplace_back(sub, std::move(run));
    return sub;
  };

  CLI::App* grade = add("grade", "Grade an exam result", RunGrade);
  AddInput(grade, s);
  AddRules(grade, s, {"ours"});
  AddMle(grade, s);
  AddPrior(grade, s);

  CLI::App* fit = add("fit", "Fit merits to an exam result", RunFit);
  AddInput(fit, s);
  fit->add_option("--estimator", s.estimator, "mle or map")
      ->check(CLI::IsMember({"mle", "map"}));
  AddMle(fit, s);
  AddPrior(fit, s);
  fit->add_option("--map-tol", s.map_tolerance)->check(CLI::PositiveNumber);
  fit->add_option("--map-max-iter", s.map_max_iterations)
      ->check(CLI::PositiveNumber);

  CLI::App* bias = add("simulate-bias",
                       "Ex-post bias on one graph and the bias-variance "
                       "decomposition over --graphs graphs",
                       RunSimulateBias);
  AddSeed(bias, s);
  AddMeritSource(bias, s);
  bias->add_option("--m", s.m, "Questions sampled from the bank (default all)")
      ->check(CLI::PositiveNumber);
  bias->add_option("--d", s.d, "Questions per student")
      ->required()
      ->check(CLI::PositiveNumber);
  AddCounts(bias, s);
  bias->add_flag("--exact", s.exact, "Enumerate every outcome instead");
  AddRules(bias, s, {"avg", "ours"});
  AddMle(bias, s);
  AddPrior(bias, s);

  CLI::App* sweep_d =
      add("sweep-degree", "Ex-post bias against the degree constraint",
          RunSweepDegree);
  AddSeed(sweep_d, s);
  AddMeritSource(sweep_d, s);
  sweep_d->add_option("--m", s.m, "Questions sampled from the bank")
      ->check(CLI::PositiveNumber);
  sweep_d->add_option("--d", s.d_list, "Degrees, e.g. 1..22 or 2,5,10")
      ->required();
  AddCounts(sweep_d, s);
  AddRules(sweep_d, s, {"avg", "ours"});
  AddMle(sweep_d, s);
  AddPrior(sweep_d, s);

  CLI::App* sweep_m =
      add("sweep-bank", "Ex-post bias against the question sample size",
          RunSweepBank);
  AddSeed(sweep_m, s);
  AddMeritSource(sweep_m, s);
  sweep_m->add_option("--difficulties", s.difficulties_path,
                      "Merit CSV whose question merits form the empirical "
                      "difficulty distribution")
      ->check(CLI::ExistingFile);
  sweep_m->add_option("--m", s.m_list, "Sample sizes, e.g. 5..50")->required();
  sweep_m->add_option("--d", s.d, "Questions per student")
      ->required()
      ->check(CLI::PositiveNumber);
  AddCounts(sweep_m, s);
  AddRules(sweep_m, s, {"avg", "ours"});
  AddMle(sweep_m, s);
  AddPrior(sweep_m, s);

  CLI::App* cv = add("cv", "Cross-validate rules on a complete answer matrix",
                     RunCv);
  AddSeed(cv, s);
  AddInput(cv, s);
  cv->add_option("--d1", s.d1_list, "Student sample sizes")->required();
  cv->add_option("--d2", s.d2_list, "Questions per sampled student")
      ->required();
  cv->add_option("--reps", s.replications, "Repetitions per (d1, d2)")
      ->check(CLI::PositiveNumber);
  AddRules(cv, s, {"avg", "ours"});
  AddMle(cv, s);
  AddPrior(cv, s);

  CLI::App* cv_sim =
      add("cv-sim", "Cross-validation on exams simulated from the prior",
          RunCvSim);
  AddSeed(cv_sim, s);
  cv_sim->add_option("--students", s.students)
      ->required()
      ->check(CLI::PositiveNumber);
  cv_sim->add_option("--questions", s.questions)
      ->required()
      ->check(CLI::PositiveNumber);
  cv_sim->add_option("--d2", s.d2_list, "Questions per student")->required();
  cv_sim->add_option("--reps", s.replications, "Repetitions per d2")
      ->check(CLI::PositiveNumber);
  AddRules(cv_sim, s, {"avg", "ours"});
  AddMle(cv_sim, s);
  AddPrior(cv_sim, s);

  CLI::App* verify = add("verify",
                         "Ex-ante fairness by enumeration and error-bound "
                         "compliance on sampled exams",
                         RunVerify);
  AddSeed(verify, s);
  AddMeritSource(verify, s);
  verify->add_option("--m", s.m)->check(CLI::PositiveNumber);
  verify->add_option("--d", s.d)->required()->check(CLI::PositiveNumber);
  verify->add_option("--reps", s.replications, "Sampled exams for the bound")
      ->check(CLI::PositiveNumber);
  AddMle(verify, s);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }

  for (auto& [sub, run] : commands) {
    if (!sub->parsed()) continue;
    try {
      Reports reports(s.output_dir);
      Json summary = Json::object();
      const int status = run(s, reports, summary);
      Json manifest = {{"tool", "fairgrade"},
                       {"version", kVersion},
                       {"command", sub->get_name()},
                       {"config", EchoConfig(sub)}};
      if (sub->get_option_no_throw("--seed") != nullptr) {
        manifest["seed"] = s.seed;
      }
      manifest["outputs"] = reports.files();
      manifest["summary"] = summary;
      reports.WriteJson("manifest.json", manifest);
      out << sub->get_name() << ": wrote " << reports.files().size()
          << " files to " << reports.dir().string() << '\n';
      if (status == kCheckFailed) err << "verification failed\n";
      return status;
    } catch (const ParameterError& e) {
      err << "configuration error: " << e.what() << '\n';
      return kConfigError;
    } catch (const InstanceTooLargeError& e) {
      err << "configuration error: " << e.what() << '\n';
      return kConfigError;
    } catch (const DataFormatError& e) {
      err << "data error: " << e.what() << '\n';
      return kDataError;
    } catch (const MissingMeritError& e) {
      err << "data error: " << e.what() << '\n';
      return kDataError;
    } catch (const ZeroDegreeError& e) {
      err << "data error: " << e.what() << '\n';
      return kDataError;
    } catch (const NonConvergenceError& e) {
      err << "numeric error: " << e.what();
      if (e.component() >= 0) err << " (component " << e.component() << ')';
      err << "; residual " << e.best().residual << '\n';
      return kNumericError;
    } catch (const NumericError& e) {
      err << "numeric error: " << e.what() << '\n';
      return kNumericError;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kDataError;
    }
  }
  return kConfigError;
}

}  // namespace fairgrade::cli
