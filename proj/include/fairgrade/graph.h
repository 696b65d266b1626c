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

#ifndef FAIRGRADE_GRAPH_H_
#define FAIRGRADE_GRAPH_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fairgrade/random.h"

namespace fairgrade {

// Students and the full question bank. Vertices of the bipartite graphs are
// numbered students first: student i is vertex i, question j is vertex n + j.
class Roster {
 public:
  // Throws ParameterError if either set is empty, an identifier repeats, or
  // a student and a question share an identifier.
  Roster(std::vector<std::string> students, std::vector<std::string> questions);

  // Roster with identifiers S1..Sn and Q1..Qq.
  static Roster Numbered(int num_students, int num_questions);

  int num_students() const { return static_cast<int>(students_.size()); }
  int num_questions() const { return static_cast<int>(questions_.size()); }
  int num_vertices() const { return num_students() + num_questions(); }

  const std::string& student(int i) const { return students_[i]; }
  const std::string& question(int j) const { return questions_[j]; }
  const std::vector<std::string>& students() const { return students_; }
  const std::vector<std::string>& questions() const { return questions_; }

  int StudentVertex(int i) const { return i; }
  int QuestionVertex(int j) const { return num_students() + j; }
  bool IsStudentVertex(int v) const { return v < num_students(); }
  // Question index of a question vertex.
  int QuestionOf(int v) const { return v - num_students(); }
  const std::string& VertexName(int v) const;

  std::optional<int> FindStudent(std::string_view id) const;
  std::optional<int> FindQuestion(std::string_view id) const;

  bool operator==(const Roster& other) const {
    return students_ == other.students_ && questions_ == other.questions_;
  }

 private:
  std::vector<std::string> students_;
  std::vector<std::string> questions_;
  std::unordered_map<std::string, int> student_index_;
  std::unordered_map<std::string, int> question_index_;
};

struct Edge {
  int student;
  int question;

  auto operator<=>(const Edge&) const = default;
};

// Undirected bipartite graph of which questions each student received.
// Edges are kept sorted by (student, question).
class TaskAssignmentGraph {
 public:
  // Throws ParameterError on out-of-range indices or duplicate edges.
  TaskAssignmentGraph(std::shared_ptr<const Roster> roster,
                      std::vector<Edge> edges);

  // Complete bipartite graph over the roster.
  static TaskAssignmentGraph Complete(std::shared_ptr<const Roster> roster);

  const Roster& roster() const { return *roster_; }
  const std::shared_ptr<const Roster>& roster_ptr() const { return roster_; }

  std::span<const Edge> edges() const { return edges_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  // Questions assigned to student i, ascending.
  std::span<const int> QuestionsOf(int i) const;
  // Students who received question j, ascending.
  std::span<const int> StudentsOf(int j) const;
  int Degree(int i) const {
    return student_offsets_[i + 1] - student_offsets_[i];
  }

  // Position of (i, j) in edges(), or -1 when not assigned.
  int EdgeIndex(int i, int j) const;
  bool HasEdge(int i, int j) const { return EdgeIndex(i, j) >= 0; }

  bool operator==(const TaskAssignmentGraph& other) const;

 private:
  std::shared_ptr<const Roster> roster_;
  std::vector<Edge> edges_;
  std::vector<int> student_offsets_;
  std::vector<int> question_offsets_;
  std::vector<int> edge_questions_;
  std::vector<int> question_students_;
};

// Directed bipartite graph of observed outcomes. A correct answer is the
// edge student -> question, an incorrect one question -> student.
class ExamResultGraph {
 public:
  // `outcomes` is parallel to assignment->edges(); entries must be 0 or 1.
  ExamResultGraph(std::shared_ptr<const TaskAssignmentGraph> assignment,
                  std::vector<uint8_t> outcomes);
  ExamResultGraph(TaskAssignmentGraph assignment, std::vector<uint8_t> outcomes)
      : ExamResultGraph(std::make_shared<const TaskAssignmentGraph>(
                            std::move(assignment)),
                        std::move(outcomes)) {}

  const TaskAssignmentGraph& assignment() const { return *assignment_; }
  const std::shared_ptr<const TaskAssignmentGraph>& assignment_ptr() const {
    return assignment_;
  }
  const Roster& roster() const { return assignment_->roster(); }
  int num_vertices() const { return roster().num_vertices(); }

  std::span<const uint8_t> outcomes() const { return outcomes_; }
  // w_ij for an assigned pair, nullopt otherwise.
  std::optional<bool> Outcome(int i, int j) const;

  // Out-neighbours of vertex v in the result digraph.
  std::span<const int> Successors(int v) const {
    return {successors_.data() + offsets_[v],
            successors_.data() + offsets_[v + 1]};
  }
  int OutDegree(int v) const { return offsets_[v + 1] - offsets_[v]; }
  int InDegree(int v) const { return in_degree_[v]; }

  bool operator==(const ExamResultGraph& other) const {
    return assignment() == other.assignment() && outcomes_ == other.outcomes_;
  }

 private:
  std::shared_ptr<const TaskAssignmentGraph> assignment_;
  std::vector<uint8_t> outcomes_;
  std::vector<int> offsets_;
  std::vector<int> successors_;
  std::vector<int> in_degree_;
};

// Samples `sample_size` distinct questions of the bank uniformly, then gives
// every student `degree` distinct questions drawn uniformly from that
// sample, independently across students. Questions outside the sample stay
// in the roster as isolated vertices.
// Throws ParameterError unless 1 <= degree <= sample_size <= |Q|.
TaskAssignmentGraph GenerateAssignment(std::shared_ptr<const Roster> roster,
                                       int sample_size, int degree, Rng& rng);
TaskAssignmentGraph GenerateAssignment(std::shared_ptr<const Roster> roster,
                                       int sample_size, int degree,
                                       uint64_t seed);

}  // namespace fairgrade

#endif  // FAIRGRADE_GRAPH_H_
