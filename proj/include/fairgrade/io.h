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

#ifndef FAIRGRADE_IO_H_
#define FAIRGRADE_IO_H_

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fairgrade/grading.h"
#include "fairgrade/graph.h"
#include "fairgrade/model.h"
#include "fairgrade/simulation.h"

namespace fairgrade {

enum class ExamFormat { kDenseCsv, kEdgeList };

// Parses "dense-csv" or "edge-list". Throws ParameterError otherwise.
ExamFormat ParseExamFormat(const std::string& name);

// Dense CSV: a header row whose first cell labels the student column and
// whose remaining cells are question ids, then one row per student with cells
// 0, 1 or NA (not assigned).
//
// Edge list: header `student,question,correct`, then one row per assigned
// pair with correct in {0, 1}. Lines starting with '#' are comments, except
// `#students=` and `#questions=` which declare the roster order (and any
// question nobody received). Without declarations the roster is inferred in
// order of first appearance.
//
// Both throw DataFormatError with the offending line number.
ExamResultGraph ParseDenseCsv(std::istream& in);
ExamResultGraph ParseEdgeList(std::istream& in);
ExamResultGraph ReadExam(const std::string& path, ExamFormat format);

void WriteDenseCsv(std::ostream& out, const ExamResultGraph& g);
// Emits the roster declarations, so ParseEdgeList restores the same graph.
void WriteEdgeList(std::ostream& out, const ExamResultGraph& g);

// Merit CSV: `vertex,kind,merit`, kind in {student, question}. Students and
// questions keep their order of appearance.
struct MeritTable {
  std::shared_ptr<const Roster> roster;
  MeritVector merits;
};
MeritTable ParseMerits(std::istream& in);
MeritTable ReadMerits(const std::string& path);
// Writes the covered vertices, students first.
void WriteMerits(std::ostream& out, const Roster& roster, const MeritVector& u);

// `student,grade,rule`, one block per grade vector.
void WriteGrades(std::ostream& out, const Roster& roster,
                 const std::vector<GradeVector>& grades);

// Students x questions with a header row of question ids.
void WritePredictionCsv(std::ostream& out, const Roster& roster,
                        const PredictionMatrix& h);
void WriteCaseTagCsv(std::ostream& out, const Roster& roster,
                     const PredictionMatrix& h);

// Tidy report tables: one row per (parameter, rule, statistic).
void WriteBiasCsv(std::ostream& out, const Roster& roster,
                  const std::vector<BiasReport>& reports);
void WriteSweepCsv(std::ostream& out, const SweepResult& sweep);
void WriteDecompositionCsv(std::ostream& out,
                           const std::vector<ErrorDecomposition>& rows);
void WriteCvCsv(std::ostream& out, const CvResult& cv);

// Shortest round-trip decimal form of a double.
std::string FormatDouble(double x);

}  // namespace fairgrade

#endif  // FAIRGRADE_IO_H_
