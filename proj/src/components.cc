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

#include "fairgrade/components.h"

#include <algorithm>
#include <utility>

namespace fairgrade {

ComponentStructure::ComponentStructure(int num_vertices,
                                       const SuccessorFn& successors)
    : component_of_(num_vertices, -1) {
  // Iterative Tarjan.
  constexpr int kUnvisited = -1;
  std::vector<int> index(num_vertices, kUnvisited);
  std::vector<int> lowlink(num_vertices, 0);
  std::vector<char> on_stack(num_vertices, 0);
  std::vector<int> stack;
  // (vertex, position in its successor list)
  std::vector<std::pair<int, size_t>> call_stack;
  int next_index = 0;

  for (int root = 0; root < num_vertices; ++root) {
    if (index[root] != kUnvisited) continue;
    call_stack.push_back({root, 0});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call_stack.empty()) {
      auto& [v, pos] = call_stack.back();
      std::span<const int> next = successors(v);
      if (pos < next.size()) {
        const int w = next[pos++];
        if (index[w] == kUnvisited) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call_stack.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
        continue;
      }
      const int done = v;
      call_stack.pop_back();
      if (!call_stack.empty()) {
        int parent = call_stack.back().first;
        lowlink[parent] = std::min(lowlink[parent], lowlink[done]);
      }
      if (lowlink[done] == index[done]) {
        const int id = static_cast<int>(components_.size());
        std::vector<int>& members = components_.emplace_back();
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          component_of_[w] = id;
          members.push_back(w);
        } while (w != done);
        std::sort(members.begin(), members.end());
      }
    }
  }

  // Successor components always carry smaller ids, so one pass in id order
  // builds the closure.
  const int count = num_components();
  words_ = (static_cast<size_t>(count) + 63) / 64;
  reach_.assign(static_cast<size_t>(count) * words_, 0);
  for (int c = 0; c < count; ++c) {
    uint64_t* row = &reach_[static_cast<size_t>(c) * words_];
    row[c >> 6] |= uint64_t{1} << (c & 63);
    for (int v : components_[c]) {
      for (int w : successors(v)) {
        const int d = component_of_[w];
        if (d == c) continue;
        const uint64_t* other = &reach_[static_cast<size_t>(d) * words_];
        for (size_t k = 0; k < words_; ++k) row[k] |= other[k];
      }
    }
  }
}

ComponentStructure StronglyConnectedComponents(const ExamResultGraph& g) {
  return ComponentStructure(g.num_vertices(),
                            [&g](int v) { return g.Successors(v); });
}

bool IsStronglyConnected(const ExamResultGraph& g) {
  return StronglyConnectedComponents(g).num_components() == 1;
}

std::string_view PairCaseName(PairCase c) {
  switch (c) {
    case PairCase::kExistingEdge:
      return "edge";
    case PairCase::kSameComponent:
      return "same";
    case PairCase::kStudentAbove:
      return "above";
    case PairCase::kQuestionAbove:
      return "below";
    case PairCase::kIncomparable:
      return "incomparable";
  }
  return "?";
}

PairCase ClassifyPair(const ComponentStructure& c, const ExamResultGraph& g,
                      int student, int question) {
  if (g.assignment().HasEdge(student, question)) return PairCase::kExistingEdge;
  const int cs = c.component_of(g.roster().StudentVertex(student));
  const int cq = c.component_of(g.roster().QuestionVertex(question));
  if (cs == cq) return PairCase::kSameComponent;
  const bool down = c.Reaches(cs, cq);
  const bool up = c.Reaches(cq, cs);
  if (down && !up) return PairCase::kStudentAbove;
  if (up && !down) return PairCase::kQuestionAbove;
  return PairCase::kIncomparable;
}

}  // namespace fairgrade
