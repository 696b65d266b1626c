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

#ifndef FAIRGRADE_COMPONENTS_H_
#define FAIRGRADE_COMPONENTS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "fairgrade/graph.h"

namespace fairgrade {

// Strongly connected components of a digraph and the reachability closure of
// its condensation.
//
// Component ids follow Tarjan completion order, which is a reverse
// topological order of the condensation: component a can reach component b
// only if a >= b.
class ComponentStructure {
 public:
  using SuccessorFn = std::function<std::span<const int>(int)>;

  ComponentStructure(int num_vertices, const SuccessorFn& successors);

  int num_vertices() const { return static_cast<int>(component_of_.size()); }
  int num_components() const { return static_cast<int>(components_.size()); }

  int component_of(int v) const { return component_of_[v]; }
  // Vertices of component c, ascending.
  const std::vector<int>& component(int c) const { return components_[c]; }
  const std::vector<std::vector<int>>& components() const {
    return components_;
  }

  // Whether component a reaches component b in the condensation DAG.
  // Reflexive.
  bool Reaches(int a, int b) const {
    return (reach_[static_cast<size_t>(a) * words_ + (b >> 6)] >> (b & 63)) &
           1u;
  }
  bool VertexReaches(int u, int v) const {
    return Reaches(component_of_[u], component_of_[v]);
  }

 private:
  std::vector<int> component_of_;
  std::vector<std::vector<int>> components_;
  size_t words_ = 0;
  std::vector<uint64_t> reach_;
};

ComponentStructure StronglyConnectedComponents(const ExamResultGraph& g);

// True iff the whole result digraph is a single strongly connected component.
bool IsStronglyConnected(const ExamResultGraph& g);

// How a student/question cell of the prediction matrix is filled.
enum class PairCase {
  kExistingEdge,
  kSameComponent,
  kStudentAbove,   // only the student reaches the question
  kQuestionAbove,  // only the question reaches the student
  kIncomparable,
};

std::string_view PairCaseName(PairCase c);

PairCase ClassifyPair(const ComponentStructure& c, const ExamResultGraph& g,
                      int student, int question);

}  // namespace fairgrade

#endif  // FAIRGRADE_COMPONENTS_H_
