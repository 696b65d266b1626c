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

#include "fairgrade/graph.h"

#include <algorithm>
#include <utility>

#include "fairgrade/errors.h"

namespace fairgrade {

Roster::Roster(std::vector<std::string> students,
               std::vector<std::string> questions)
    : students_(std::move(students)), questions_(std::move(questions)) {
  if (students_.empty()) throw ParameterError("roster needs a student");
  if (questions_.empty()) throw ParameterError("roster needs a question");
  for (int i = 0; i < num_students(); ++i) {
    if (!student_index_.emplace(students_[i], i).second) {
      throw ParameterError("duplicate student id '" + students_[i] + "'");
    }
  }
  for (int j = 0; j < num_questions(); ++j) {
    if (!question_index_.emplace(questions_[j], j).second) {
      throw ParameterError("duplicate question id '" + questions_[j] + "'");
    }
    if (student_index_.contains(questions_[j])) {
      throw ParameterError("id '" + questions_[j] +
                           "' names both a student and a question");
    }
  }
}

Roster Roster::Numbered(int num_students, int num_questions) {
  if (num_students < 1 || num_questions < 1) {
    throw ParameterError("roster sizes must be positive");
  }
  std::vector<std::string> s(num_students), q(num_questions);
  for (int i = 0; i < num_students; ++i) s[i] = "S" + std::to_string(i + 1);
  for (int j = 0; j < num_questions; ++j) q[j] = "Q" + std::to_string(j + 1);
  return Roster(std::move(s), std::move(q));
}

const std::string& Roster::VertexName(int v) const {
  return IsStudentVertex(v) ? students_[v] : questions_[QuestionOf(v)];
}

std::optional<int> Roster::FindStudent(std::string_view id) const {
  auto it = student_index_.find(std::string(id));
  if (it == student_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Roster::FindQuestion(std::string_view id) const {
  auto it = question_index_.find(std::string(id));
  if (it == question_index_.end()) return std::nullopt;
  return it->second;
}

TaskAssignmentGraph::TaskAssignmentGraph(std::shared_ptr<const Roster> roster,
                                         std::vector<Edge> edges)
    : roster_(std::move(roster)), edges_(std::move(edges)) {
  if (!roster_) throw ParameterError("assignment graph needs a roster");
  const int n = roster_->num_students();
  const int q = roster_->num_questions();
  for (const Edge& e : edges_) {
    if (e.student < 0 || e.student >= n || e.question < 0 ||
        e.question >= q) {
      throw ParameterError("edge (" + std::to_string(e.student) + ", " +
                           std::to_string(e.question) + ") is out of range");
    }
  }
  std::sort(edges_.begin(), edges_.end());
  auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw ParameterError("duplicate edge (" + roster_->student(dup->student) +
                         ", " + roster_->question(dup->question) + ")");
  }

  student_offsets_.assign(n + 1, 0);
  question_offsets_.assign(q + 1, 0);
  for (const Edge& e : edges_) {
    ++student_offsets_[e.student + 1];
    ++question_offsets_[e.question + 1];
  }
  for (int i = 0; i < n; ++i) student_offsets_[i + 1] += student_offsets_[i];
  for (int j = 0; j < q; ++j) question_offsets_[j + 1] += question_offsets_[j];

  edge_questions_.resize(edges_.size());
  question_students_.resize(edges_.size());
  std::vector<int> fill(question_offsets_.begin(), question_offsets_.end() - 1);
  for (size_t k = 0; k < edges_.size(); ++k) {
    edge_questions_[k] = edges_[k].question;
    // Edges are sorted by student, so each question's list comes out sorted.
    question_students_[fill[edges_[k].question]++] = edges_[k].student;
  }
}

TaskAssignmentGraph TaskAssignmentGraph::Complete(
    std::shared_ptr<const Roster> roster) {
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(roster->num_students()) *
                roster->num_questions());
  for (int i = 0; i < roster->num_students(); ++i) {
    for (int j = 0; j < roster->num_questions(); ++j) edges.push_back({i, j});
  }
  return TaskAssignmentGraph(std::move(roster), std::move(edges));
}

std::span<const int> TaskAssignmentGraph::QuestionsOf(int i) const {
  return {edge_questions_.data() + student_offsets_[i],
          edge_questions_.data() + student_offsets_[i + 1]};
}

std::span<const int> TaskAssignmentGraph::StudentsOf(int j) const {
  return {question_students_.data() + question_offsets_[j],
          question_students_.data() + question_offsets_[j + 1]};
}

int TaskAssignmentGraph::EdgeIndex(int i, int j) const {
  std::span<const int> row = QuestionsOf(i);
  auto it = std::lower_bound(row.begin(), row.end(), j);
  if (it == row.end() || *it != j) return -1;
  return student_offsets_[i] + static_cast<int>(it - row.begin());
}

bool TaskAssignmentGraph::operator==(const TaskAssignmentGraph& other) const {
  return roster() == other.roster() && edges_ == other.edges_;
}

ExamResultGraph::ExamResultGraph(
    std::shared_ptr<const TaskAssignmentGraph> assignment,
    std::vector<uint8_t> outcomes)
    : assignment_(std::move(assignment)), outcomes_(std::move(outcomes)) {
  if (!assignment_) throw ParameterError("result graph needs an assignment");
  if (outcomes_.size() != assignment_->edges().size()) {
    throw ParameterError("outcome count " + std::to_string(outcomes_.size()) +
                         " does not match edge count " +
                         std::to_string(assignment_->num_edges()));
  }
  const int v_count = roster().num_vertices();
  offsets_.assign(v_count + 1, 0);
  in_degree_.assign(v_count, 0);
  std::span<const Edge> edges = assignment_->edges();
  auto tail_head = [&](size_t k) {
    const int s = roster().StudentVertex(edges[k].student);
    const int q = roster().QuestionVertex(edges[k].question);
    return outcomes_[k] ? std::pair{s, q} : std::pair{q, s};
  };
  for (size_t k = 0; k < edges.size(); ++k) {
    if (outcomes_[k] > 1) throw ParameterError("outcomes must be 0 or 1");
    auto [from, to] = tail_head(k);
    ++offsets_[from + 1];
    ++in_degree_[to];
  }
  for (int v = 0; v < v_count; ++v) offsets_[v + 1] += offsets_[v];
  successors_.resize(edges.size());
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (size_t k = 0; k < edges.size(); ++k) {
    auto [from, to] = tail_head(k);
    successors_[fill[from]++] = to;
  }
}

std::optional<bool> ExamResultGraph::Outcome(int i, int j) const {
  const int k = assignment_->EdgeIndex(i, j);
  if (k < 0) return std::nullopt;
  return outcomes_[k] != 0;
}

TaskAssignmentGraph GenerateAssignment(std::shared_ptr<const Roster> roster,
                                       int sample_size, int degree, Rng& rng) {
  const int bank = roster->num_questions();
  if (degree < 1 || degree > sample_size || sample_size > bank) {
    throw ParameterError("need 1 <= d <= m <= |Q|, got d=" +
                         std::to_string(degree) +
                         ", m=" + std::to_string(sample_size) +
                         ", |Q|=" + std::to_string(bank));
  }
  const std::vector<int> sampled =
      rng.SampleWithoutReplacement(bank, sample_size);
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(roster->num_students()) * degree);
  for (int i = 0; i < roster->num_students(); ++i) {
    for (int pick : rng.SampleWithoutReplacement(sample_size, degree)) {
      edges.push_back({i, sampled[pick]});
    }
  }
  return TaskAssignmentGraph(std::move(roster), std::move(edges));
}

TaskAssignmentGraph GenerateAssignment(std::shared_ptr<const Roster> roster,
                                       int sample_size, int degree,
                                       uint64_t seed) {
  Rng rng(seed);
  return GenerateAssignment(std::move(roster), sample_size, degree, rng);
}

}  // namespace fairgrade
