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

#include "fairgrade/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string_view>
#include <unordered_map>

#include "fairgrade/errors.h"

namespace fairgrade {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> SplitCsv(std::string_view line) {
  std::vector<std::string> cells;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    cells.emplace_back(Trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool IsBlank(std::string_view line) { return Trim(line).empty(); }

std::string Join(const std::vector<std::string>& xs) {
  std::string out;
  for (size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ',';
    out += xs[k];
  }
  return out;
}

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open '" + path + "'");
  return in;
}

}  // namespace

std::string FormatDouble(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

ExamFormat ParseExamFormat(const std::string& name) {
  if (name == "dense-csv") return ExamFormat::kDenseCsv;
  if (name == "edge-list") return ExamFormat::kEdgeList;
  throw ParameterError("unknown exam format '" + name +
                       "' (expected dense-csv or edge-list)");
}

ExamResultGraph ParseDenseCsv(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    header = SplitCsv(line);
    break;
  }
  if (header.size() < 2) {
    throw DataFormatError("dense CSV needs a header with question ids",
                          line_no);
  }
  std::vector<std::string> questions(header.begin() + 1, header.end());
  std::vector<std::string> students;
  std::vector<std::pair<Edge, uint8_t>> cells;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    std::vector<std::string> row = SplitCsv(line);
    if (row.size() != header.size()) {
      throw DataFormatError("expected " + std::to_string(header.size()) +
                                " cells, found " + std::to_string(row.size()),
                            line_no);
    }
    const int i = static_cast<int>(students.size());
    students.push_back(row[0]);
    for (size_t j = 1; j < row.size(); ++j) {
      const std::string& cell = row[j];
      if (cell == "NA") continue;
      if (cell != "0" && cell != "1") {
        throw DataFormatError("cell '" + cell + "' for question '" +
                                  questions[j - 1] + "' is not 0, 1 or NA",
                              line_no);
      }
      cells.push_back({{i, static_cast<int>(j - 1)},
                       static_cast<uint8_t>(cell == "1")});
    }
  }
  std::shared_ptr<const Roster> roster;
  try {
    roster = std::make_shared<const Roster>(students, questions);
  } catch (const ParameterError& e) {
    throw DataFormatError(e.what());
  }
  std::vector<Edge> edges;
  std::vector<uint8_t> outcomes;
  for (const auto& [e, w] : cells) {
    edges.push_back(e);
    outcomes.push_back(w);
  }
  // Cells arrive row-major, which is the graph's edge order.
  return ExamResultGraph(
      std::make_shared<const TaskAssignmentGraph>(roster, std::move(edges)),
      std::move(outcomes));
}

ExamResultGraph ParseEdgeList(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::vector<std::string> students, questions;
  std::unordered_map<std::string, int> student_at, question_at;
  bool declared_students = false, declared_questions = false;
  auto declare = [&](std::string_view list, std::vector<std::string>& ids,
                     std::unordered_map<std::string, int>& index) {
    for (std::string& id : SplitCsv(list)) {
      if (id.empty()) continue;
      if (!index.emplace(id, static_cast<int>(ids.size())).second) {
        throw DataFormatError("id '" + id + "' declared twice", line_no);
      }
      ids.push_back(id);
    }
  };
  auto intern = [&](const std::string& id, bool declared,
                    std::vector<std::string>& ids,
                    std::unordered_map<std::string, int>& index,
                    const char* kind) {
    auto it = index.find(id);
    if (it != index.end()) return it->second;
    if (declared) {
      throw DataFormatError(std::string(kind) + " '" + id +
                                "' is not in the declared roster",
                            line_no);
    }
    index.emplace(id, static_cast<int>(ids.size()));
    ids.push_back(id);
    return static_cast<int>(ids.size()) - 1;
  };

  std::vector<Edge> edges;
  std::vector<uint8_t> outcomes;
  std::set<std::pair<int, int>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = Trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (view.starts_with("#students=")) {
        declare(view.substr(10), students, student_at);
        declared_students = true;
      } else if (view.starts_with("#questions=")) {
        declare(view.substr(11), questions, question_at);
        declared_questions = true;
      }
      continue;
    }
    std::vector<std::string> row = SplitCsv(view);
    if (!have_header) {
      if (row != std::vector<std::string>{"student", "question", "correct"}) {
        throw DataFormatError("expected header 'student,question,correct'",
                              line_no);
      }
      have_header = true;
      continue;
    }
    if (row.size() != 3) {
      throw DataFormatError("expected 3 cells, found " +
                                std::to_string(row.size()),
                            line_no);
    }
    if (row[0].empty() || row[1].empty()) {
      throw DataFormatError("empty student or question id", line_no);
    }
    if (row[2] != "0" && row[2] != "1") {
      throw DataFormatError("correct must be 0 or 1, found '" + row[2] + "'",
                            line_no);
    }
    const int i = intern(row[0], declared_students, students, student_at,
                         "student");
    const int j = intern(row[1], declared_questions, questions, question_at,
                         "question");
    if (!seen.insert({i, j}).second) {
      throw DataFormatError(
          "duplicate edge (" + row[0] + ", " + row[1] + ")", line_no);
    }
    edges.push_back({i, j});
    outcomes.push_back(row[2] == "1");
  }
  if (!have_header) throw DataFormatError("empty edge list");

  std::shared_ptr<const Roster> roster;
  try {
    roster = std::make_shared<const Roster>(students, questions);
  } catch (const ParameterError& e) {
    throw DataFormatError(e.what());
  }
  // Reorder outcomes to match the graph's sorted edge order.
  std::vector<size_t> order(edges.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return edges[a] < edges[b]; });
  std::vector<Edge> sorted_edges;
  std::vector<uint8_t> sorted_outcomes;
  for (size_t k : order) {
    sorted_edges.push_back(edges[k]);
    sorted_outcomes.push_back(outcomes[k]);
  }
  return ExamResultGraph(std::make_shared<const TaskAssignmentGraph>(
                             roster, std::move(sorted_edges)),
                         std::move(sorted_outcomes));
}

ExamResultGraph ReadExam(const std::string& path, ExamFormat format) {
  std::ifstream in = OpenInput(path);
  return format == ExamFormat::kDenseCsv ? ParseDenseCsv(in)
                                         : ParseEdgeList(in);
}

void WriteDenseCsv(std::ostream& out, const ExamResultGraph& g) {
  const Roster& roster = g.roster();
  out << "student," << Join(roster.questions()) << '\n';
  for (int i = 0; i < roster.num_students(); ++i) {
    out << roster.student(i);
    for (int j = 0; j < roster.num_questions(); ++j) {
      std::optional<bool> w = g.Outcome(i, j);
      out << ',' << (w ? (*w ? "1" : "0") : "NA");
    }
    out << '\n';
  }
}

void WriteEdgeList(std::ostream& out, const ExamResultGraph& g) {
  const Roster& roster = g.roster();
  out << "student,question,correct\n";
  out << "#students=" << Join(roster.students()) << '\n';
  out << "#questions=" << Join(roster.questions()) << '\n';
  std::span<const Edge> edges = g.assignment().edges();
  for (size_t k = 0; k < edges.size(); ++k) {
    out << roster.student(edges[k].student) << ','
        << roster.question(edges[k].question) << ','
        << static_cast<int>(g.outcomes()[k]) << '\n';
  }
}

MeritTable ParseMerits(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::vector<std::string> students, questions;
  std::vector<double> abilities, difficulties;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    std::vector<std::string> row = SplitCsv(line);
    if (!have_header) {
      if (row != std::vector<std::string>{"vertex", "kind", "merit"}) {
        throw DataFormatError("expected header 'vertex,kind,merit'", line_no);
      }
      have_header = true;
      continue;
    }
    if (row.size() != 3) {
      throw DataFormatError("expected 3 cells", line_no);
    }
    double value = 0.0;
    const std::string& text = row[2];
    auto [end, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() ||
        !std::isfinite(value)) {
      throw DataFormatError("merit '" + text + "' is not a finite number",
                            line_no);
    }
    if (row[1] == "student") {
      students.push_back(row[0]);
      abilities.push_back(value);
    } else if (row[1] == "question") {
      questions.push_back(row[0]);
      difficulties.push_back(value);
    } else {
      throw DataFormatError("kind must be student or question", line_no);
    }
  }
  MeritTable table;
  try {
    table.roster = std::make_shared<const Roster>(students, questions);
  } catch (const ParameterError& e) {
    throw DataFormatError(e.what());
  }
  table.merits = MeritVector::FromParts(abilities, difficulties);
  return table;
}

MeritTable ReadMerits(const std::string& path) {
  std::ifstream in = OpenInput(path);
  return ParseMerits(in);
}

void WriteMerits(std::ostream& out, const Roster& roster,
                 const MeritVector& u) {
  out << "vertex,kind,merit\n";
  for (int v = 0; v < roster.num_vertices(); ++v) {
    if (!u.Covers(v)) continue;
    out << roster.VertexName(v) << ','
        << (roster.IsStudentVertex(v) ? "student" : "question") << ','
        << FormatDouble(u[v]) << '\n';
  }
}

void WriteGrades(std::ostream& out, const Roster& roster,
                 const std::vector<GradeVector>& grades) {
  out << "student,grade,rule\n";
  for (const GradeVector& g : grades) {
    for (int i = 0; i < roster.num_students(); ++i) {
      out << roster.student(i) << ',' << FormatDouble(g.grades[i]) << ','
          << g.rule_name << '\n';
    }
  }
}

void WritePredictionCsv(std::ostream& out, const Roster& roster,
                        const PredictionMatrix& h) {
  out << "student," << Join(roster.questions()) << '\n';
  for (int i = 0; i < roster.num_students(); ++i) {
    out << roster.student(i);
    for (int j = 0; j < roster.num_questions(); ++j) {
      out << ',' << FormatDouble(h.at(i, j));
    }
    out << '\n';
  }
}

void WriteCaseTagCsv(std::ostream& out, const Roster& roster,
                     const PredictionMatrix& h) {
  out << "student," << Join(roster.questions()) << '\n';
  for (int i = 0; i < roster.num_students(); ++i) {
    out << roster.student(i);
    for (int j = 0; j < roster.num_questions(); ++j) {
      out << ',' << PairCaseName(h.tag(i, j));
    }
    out << '\n';
  }
}

void WriteBiasCsv(std::ostream& out, const Roster& roster,
                  const std::vector<BiasReport>& reports) {
  out << "student,rule,statistic,value\n";
  for (const BiasReport& r : reports) {
    for (int i = 0; i < roster.num_students(); ++i) {
      const std::string prefix = roster.student(i) + ',' + r.rule + ',';
      out << prefix << "expected_grade," << FormatDouble(r.expected_grade[i])
          << '\n';
      out << prefix << "expected_grade_stderr,"
          << FormatDouble(r.expected_grade_stderr[i]) << '\n';
      out << prefix << "benchmark," << FormatDouble(r.benchmark[i]) << '\n';
      out << prefix << "deviation," << FormatDouble(r.deviation[i]) << '\n';
      out << prefix << "bias," << FormatDouble(r.bias[i]) << '\n';
    }
  }
}

void WriteSweepCsv(std::ostream& out, const SweepResult& sweep) {
  out << "parameter,value,rule,statistic,estimate,stderr\n";
  for (const SweepPoint& p : sweep.points) {
    for (const RuleStats& s : p.rules) {
      const std::string prefix =
          sweep.axis + ',' + std::to_string(p.value) + ',' + s.rule + ',';
      out << prefix << "max_bias," << FormatDouble(s.max_bias) << ','
          << FormatDouble(s.max_bias_stderr) << '\n';
      out << prefix << "avg_bias," << FormatDouble(s.avg_bias) << ','
          << FormatDouble(s.avg_bias_stderr) << '\n';
      out << prefix << "failed_replications," << s.failed_replications
          << ",0\n";
    }
  }
}

void WriteDecompositionCsv(std::ostream& out,
                           const std::vector<ErrorDecomposition>& rows) {
  out << "rule,statistic,value\n";
  for (const ErrorDecomposition& d : rows) {
    out << d.rule << ",bias," << FormatDouble(d.bias) << '\n';
    out << d.rule << ",variance," << FormatDouble(d.variance) << '\n';
    out << d.rule << ",error," << FormatDouble(d.error) << '\n';
    out << d.rule << ",error_stderr," << FormatDouble(d.error_stderr) << '\n';
    out << d.rule << ",bias_plugin," << FormatDouble(d.bias_plugin) << '\n';
    out << d.rule << ",variance_plugin," << FormatDouble(d.variance_plugin)
        << '\n';
  }
}

void WriteCvCsv(std::ostream& out, const CvResult& cv) {
  out << "d1,d2,rule,statistic,estimate,stderr\n";
  for (const CvPoint& p : cv.points) {
    for (size_t k = 0; k < p.rules.size(); ++k) {
      out << p.d1 << ',' << p.d2 << ',' << p.rules[k] << ",mse,"
          << FormatDouble(p.mse[k]) << ',' << FormatDouble(p.mse_stderr[k])
          << '\n';
    }
  }
}

}  // namespace fairgrade
