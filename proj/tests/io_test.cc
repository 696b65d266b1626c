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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fairgrade/errors.h"
#include "test_util.h"

namespace fairgrade {
namespace {

ExamResultGraph ParseDense(const std::string& text) {
  std::istringstream in(text);
  return ParseDenseCsv(in);
}

ExamResultGraph ParseEdges(const std::string& text) {
  std::istringstream in(text);
  return ParseEdgeList(in);
}

int ErrorLine(const std::function<void()>& body) {
  try {
    body();
  } catch (const DataFormatError& e) {
    return e.line();
  }
  return -1;
}

TEST(DenseCsvTest, Parses) {
  const ExamResultGraph g = ParseDense(
      "student,Q1,Q2,Q3\n"
      "S1,1,0,NA\n"
      "S2,0,1,NA\n"
      "S3,0,NA,1\n");
  EXPECT_EQ(g.roster().num_students(), 3);
  EXPECT_EQ(g.roster().question(2), "Q3");
  EXPECT_EQ(g.Outcome(0, 0), true);
  EXPECT_EQ(g.Outcome(1, 0), false);
  EXPECT_FALSE(g.Outcome(0, 2).has_value());
  EXPECT_EQ(g.assignment().num_edges(), 6);
}

TEST(DenseCsvTest, CompleteMatrix) {
  std::ostringstream text;
  text << "student";
  for (int j = 0; j < 22; ++j) text << ",q" << j;
  text << '\n';
  for (int i = 0; i < 35; ++i) {
    text << "s" << i;
    for (int j = 0; j < 22; ++j) text << ',' << (i + j) % 2;
    text << '\n';
  }
  const ExamResultGraph g = ParseDense(text.str());
  EXPECT_EQ(g.assignment(), TaskAssignmentGraph::Complete(g.assignment().roster_ptr()));
}

TEST(DenseCsvTest, RejectsBadCells) {
  EXPECT_EQ(ErrorLine([] { ParseDense("student,Q1,Q2\nS1,1,0\nS2,2,1\n"); }),
            3);
  EXPECT_EQ(ErrorLine([] { ParseDense("student,Q1,Q2\nS1,1\n"); }), 2);
  EXPECT_EQ(ErrorLine([] { ParseDense("student,Q1\nS1,yes\n"); }), 2);
  EXPECT_THROW(ParseDense("student,Q1\nS1,1\nS1,0\n"), DataFormatError);
  EXPECT_THROW(ParseDense(""), DataFormatError);
}

TEST(EdgeListTest, Parses) {
  const ExamResultGraph one = ParseEdges("student,question,correct\nA,X,1\n");
  EXPECT_EQ(one.assignment().num_edges(), 1);
  EXPECT_EQ(one.roster().student(0), "A");
  EXPECT_EQ(one.Outcome(0, 0), true);

  const ExamResultGraph g = ParseEdges(
      "student,question,correct\n"
      "# a comment\n"
      "#questions=Q1,Q2,Q3\n"
      "S2,Q2,0\n"
      "S1,Q1,1\n");
  EXPECT_EQ(g.roster().num_questions(), 3);
  EXPECT_EQ(g.roster().student(0), "S2");
  EXPECT_EQ(g.Outcome(0, 1), false);
  EXPECT_EQ(g.Outcome(1, 0), true);
}

TEST(EdgeListTest, RejectsBadRows) {
  EXPECT_EQ(ErrorLine([] {
              ParseEdges("student,question,correct\nA,X,1\nB,X,0\nA,X,0\n");
            }),
            4);
  EXPECT_EQ(ErrorLine([] { ParseEdges("student,question,correct\nA,X,2\n"); }),
            2);
  EXPECT_EQ(ErrorLine([] { ParseEdges("student,question,correct\nA,X\n"); }),
            2);
  EXPECT_EQ(ErrorLine([] { ParseEdges("who,what,ok\nA,X,1\n"); }), 1);
}

TEST(RoundTripTest, BothFormats) {
  Rng rng(41);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + static_cast<int>(rng.UniformInt(6));
    const int q = 1 + static_cast<int>(rng.UniformInt(6));
    const ExamResultGraph g = testing::RandomExam(n, q, 0.5, rng);
    std::ostringstream dense, edges;
    WriteDenseCsv(dense, g);
    WriteEdgeList(edges, g);
    EXPECT_EQ(ParseDense(dense.str()), g);
    EXPECT_EQ(ParseEdges(edges.str()), g);
  }
}

TEST(MeritsTest, RoundTrip) {
  const Roster roster = Roster::Numbered(2, 3);
  const MeritVector u({0.1, -1.0 / 3.0, 2.5e-17, -3.090, 1e300});
  std::ostringstream out;
  WriteMerits(out, roster, u);
  std::istringstream in(out.str());
  const MeritTable table = ParseMerits(in);
  EXPECT_EQ(*table.roster, roster);
  for (int v = 0; v < 5; ++v) EXPECT_EQ(table.merits.at(v), u[v]);
}

TEST(MeritsTest, Rejects) {
  std::istringstream bad_kind("vertex,kind,merit\nA,teacher,1\n");
  EXPECT_THROW(ParseMerits(bad_kind), DataFormatError);
  std::istringstream bad_value("vertex,kind,merit\nA,student,abc\n");
  EXPECT_THROW(ParseMerits(bad_value), DataFormatError);
}

TEST(ReportTest, GradesCsv) {
  const ExamResultGraph g = testing::RunningExample();
  std::ostringstream out;
  WriteGrades(out, g.roster(), {SimpleAverage(g)});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n', 20) + 1),
            "student,grade,rule\nS1,0.5,avg\n");
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(1.0), "1");
  Rng rng(42);
  for (int t = 0; t < 1000; ++t) {
    const double x = rng.Normal() * std::pow(10.0, rng.Normal() * 5);
    EXPECT_EQ(std::stod(FormatDouble(x)), x);
  }
}

TEST(ExamFormatTest, Names) {
  EXPECT_EQ(ParseExamFormat("dense-csv"), ExamFormat::kDenseCsv);
  EXPECT_EQ(ParseExamFormat("edge-list"), ExamFormat::kEdgeList);
  EXPECT_THROW(ParseExamFormat("xlsx"), ParameterError);
}

}  // namespace
}  // namespace fairgrade
