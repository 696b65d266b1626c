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

#include "fairgrade/estimation.h"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <string>

#include "fairgrade/components.h"

namespace fairgrade {
namespace {

// Result digraph restricted to a vertex subset, in local indices.
struct LocalGraph {
  std::vector<int> vertices;
  std::vector<int> offsets;     // undirected neighbourhoods
  std::vector<int> neighbours;
  std::vector<int> out_offsets;
  std::vector<int> successors;
  std::vector<double> wins;
};

LocalGraph Restrict(const ExamResultGraph& g, std::span<const int> vertices) {
  const int total = g.num_vertices();
  std::vector<int> local(total, -1);
  LocalGraph out;
  out.vertices.assign(vertices.begin(), vertices.end());
  for (size_t k = 0; k < vertices.size(); ++k) {
    const int v = vertices[k];
    if (v < 0 || v >= total) {
      throw ParameterError("vertex " + std::to_string(v) + " out of range");
    }
    if (local[v] >= 0) {
      throw ParameterError("vertex " + std::to_string(v) + " listed twice");
    }
    local[v] = static_cast<int>(k);
  }
  const int size = static_cast<int>(vertices.size());
  std::vector<std::vector<int>> nbr(size), succ(size);
  for (int a = 0; a < size; ++a) {
    for (int w : g.Successors(vertices[a])) {
      const int b = local[w];
      if (b < 0) continue;
      succ[a].push_back(b);
      nbr[a].push_back(b);
      nbr[b].push_back(a);
    }
  }
  out.offsets.push_back(0);
  out.out_offsets.push_back(0);
  out.wins.resize(size);
  for (int a = 0; a < size; ++a) {
    out.neighbours.insert(out.neighbours.end(), nbr[a].begin(), nbr[a].end());
    out.successors.insert(out.successors.end(), succ[a].begin(),
                          succ[a].end());
    out.offsets.push_back(static_cast<int>(out.neighbours.size()));
    out.out_offsets.push_back(static_cast<int>(out.successors.size()));
    out.wins[a] = static_cast<double>(succ[a].size());
  }
  return out;
}

double LocalResidual(const LocalGraph& lg, const std::vector<double>& u) {
  double worst = 0.0;
  for (size_t a = 0; a < u.size(); ++a) {
    double expected = 0.0;
    for (int k = lg.offsets[a]; k < lg.offsets[a + 1]; ++k) {
      expected += Logistic(u[a] - u[lg.neighbours[k]]);
    }
    worst = std::max(worst, std::abs(lg.wins[a] - expected));
  }
  return worst;
}

void CenterInPlace(std::vector<double>& u) {
  if (u.empty()) return;
  double mean = 0.0;
  for (double x : u) mean += x;
  mean /= static_cast<double>(u.size());
  for (double& x : u) x -= mean;
}

MeritVector Expand(int num_vertices, std::span<const int> vertices,
                   const std::vector<double>& local) {
  MeritVector out(num_vertices);
  for (size_t k = 0; k < vertices.size(); ++k) out.Set(vertices[k], local[k]);
  return out;
}

}  // namespace

double LikelihoodResidual(const ExamResultGraph& g,
                          std::span<const int> vertices,
                          const MeritVector& u) {
  const LocalGraph lg = Restrict(g, vertices);
  std::vector<double> local(vertices.size());
  for (size_t k = 0; k < vertices.size(); ++k) local[k] = u.at(vertices[k]);
  return LocalResidual(lg, local);
}

FitReport MleFit(const ExamResultGraph& g, std::span<const int> vertices,
                 const MleOptions& options) {
  if (!(options.tolerance > 0)) {
    throw ParameterError("MLE tolerance must be positive");
  }
  if (vertices.empty()) throw ParameterError("MLE over an empty vertex set");
  const LocalGraph lg = Restrict(g, vertices);
  const int size = static_cast<int>(vertices.size());

  const ComponentStructure scc(size, [&lg](int a) {
    return std::span<const int>(lg.successors.data() + lg.out_offsets[a],
                                lg.successors.data() + lg.out_offsets[a + 1]);
  });
  if (scc.num_components() != 1) {
    throw NotStronglyConnectedError(
        "vertex set of size " + std::to_string(size) + " splits into " +
        std::to_string(scc.num_components()) +
        " strongly connected components; the MLE is not unique");
  }

  std::vector<double> u(size, 0.0);
  if (options.initial) {
    for (int a = 0; a < size; ++a) u[a] = options.initial->at(vertices[a]);
  }
  std::vector<int> students, questions;
  for (int a = 0; a < size; ++a) {
    (g.roster().IsStudentVertex(vertices[a]) ? students : questions)
        .push_back(a);
  }

  // Iterate on gamma = e^u; rescaled to unit geometric mean every sweep.
  std::vector<double> gamma(size);
  auto to_gamma = [&] {
    CenterInPlace(u);
    for (int a = 0; a < size; ++a) gamma[a] = std::exp(u[a]);
  };
  auto to_merits = [&] {
    for (int a = 0; a < size; ++a) u[a] = std::log(gamma[a]);
    CenterInPlace(u);
  };
  auto residual = [&] {
    double worst = 0.0;
    for (int a = 0; a < size; ++a) {
      double expected = 0.0;
      for (int k = lg.offsets[a]; k < lg.offsets[a + 1]; ++k) {
        expected += gamma[a] / (gamma[a] + gamma[lg.neighbours[k]]);
      }
      worst = std::max(worst, std::abs(lg.wins[a] - expected));
    }
    return worst;
  };
  auto mm_block = [&](const std::vector<int>& block) {
    // Vertices of one block are never adjacent, so updating them together
    // against the other block's current values is an exact MM step.
    for (int a : block) {
      double denom = 0.0;
      for (int k = lg.offsets[a]; k < lg.offsets[a + 1]; ++k) {
        denom += 1.0 / (gamma[a] + gamma[lg.neighbours[k]]);
      }
      gamma[a] = lg.wins[a] / denom;
    }
  };

  FitReport report;
  report.vertices.assign(vertices.begin(), vertices.end());
  to_gamma();
  for (int iter = 0;; ++iter) {
    if (options.on_iterate) {
      to_merits();
      options.on_iterate(iter, Expand(g.num_vertices(), vertices, u));
    }
    report.residual = residual();
    report.iterations = iter;
    if (report.residual <= options.tolerance || size == 1) {
      report.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;
    mm_block(students);
    mm_block(questions);
    to_merits();
    to_gamma();
  }
  to_merits();
  report.merits = Expand(g.num_vertices(), vertices, u);
  report.merits.NormalizeMeanZero();
  if (!report.converged) {
    throw NonConvergenceError(
        "MM iteration stopped after " + std::to_string(report.iterations) +
            " iterations with residual " + std::to_string(report.residual),
        std::move(report));
  }
  return report;
}

void PriorSpec::Validate() const {
  auto ok = [](double s) { return std::isfinite(s) && s > 0; };
  if (!ok(student_std) || !ok(question_std)) {
    throw ParameterError("prior standard deviations must be positive");
  }
  if (!std::isfinite(student_mean) || !std::isfinite(question_mean)) {
    throw ParameterError("prior means must be finite");
  }
}

namespace {

struct Posterior {
  const ExamResultGraph& g;
  const PriorSpec& prior;

  double Mean(int v) const {
    return g.roster().IsStudentVertex(v) ? prior.student_mean
                                         : prior.question_mean;
  }
  double Precision(int v) const {
    const double s = g.roster().IsStudentVertex(v) ? prior.student_std
                                                   : prior.question_std;
    return 1.0 / (s * s);
  }

  double Value(const std::vector<double>& u) const {
    double total = 0.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
      for (int w : g.Successors(v)) total += LogLogistic(u[v] - u[w]);
      const double z = u[v] - Mean(v);
      total -= 0.5 * Precision(v) * z * z;
    }
    return total;
  }

  std::vector<double> Gradient(const std::vector<double>& u) const {
    std::vector<double> grad(u.size());
    for (int v = 0; v < g.num_vertices(); ++v) {
      grad[v] -= Precision(v) * (u[v] - Mean(v));
      for (int w : g.Successors(v)) {
        const double loss = 1.0 - Logistic(u[v] - u[w]);
        grad[v] += loss;
        grad[w] -= loss;
      }
    }
    return grad;
  }
};

double InfNorm(const std::vector<double>& x) {
  double worst = 0.0;
  for (double v : x) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace

std::vector<double> LogPosteriorGradient(const ExamResultGraph& g,
                                         const PriorSpec& prior,
                                         const MeritVector& u) {
  std::vector<double> values(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) values[v] = u.at(v);
  return Posterior{g, prior}.Gradient(values);
}

FitReport MapFit(const ExamResultGraph& g, const PriorSpec& prior,
                 const MapOptions& options) {
  prior.Validate();
  if (!(options.tolerance > 0)) {
    throw ParameterError("MAP tolerance must be positive");
  }
  const Posterior post{g, prior};
  const int size = g.num_vertices();
  std::vector<double> u(size);
  for (int v = 0; v < size; ++v) u[v] = post.Mean(v);

  FitReport report;
  report.vertices.resize(size);
  for (int v = 0; v < size; ++v) report.vertices[v] = v;

  std::vector<double> grad = post.Gradient(u);
  double value = post.Value(u);
  for (int iter = 0;; ++iter) {
    report.iterations = iter;
    report.residual = InfNorm(grad);
    if (report.residual <= options.tolerance) {
      report.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;

    // Negative Hessian: weighted graph Laplacian plus prior precisions.
    std::vector<Eigen::Triplet<double>> triplets;
    for (int v = 0; v < size; ++v) {
      triplets.emplace_back(v, v, post.Precision(v));
      for (int w : g.Successors(v)) {
        const double p = Logistic(u[v] - u[w]);
        const double c = p * (1.0 - p);
        triplets.emplace_back(v, v, c);
        triplets.emplace_back(w, w, c);
        triplets.emplace_back(v, w, -c);
        triplets.emplace_back(w, v, -c);
      }
    }
    Eigen::SparseMatrix<double> neg_hessian(size, size);
    neg_hessian.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(neg_hessian);
    if (solver.info() != Eigen::Success) {
      throw NumericError("MAP Newton system is not positive definite");
    }
    const Eigen::VectorXd step =
        solver.solve(Eigen::Map<const Eigen::VectorXd>(grad.data(), size));

    double slope = 0.0;
    for (int v = 0; v < size; ++v) slope += grad[v] * step[v];
    double t = 1.0;
    std::vector<double> trial(size);
    for (int halvings = 0;; ++halvings) {
      for (int v = 0; v < size; ++v) trial[v] = u[v] + t * step[v];
      const double trial_value = post.Value(trial);
      if (trial_value >= value + 1e-4 * t * slope || halvings >= 60) {
        value = trial_value;
        break;
      }
      t *= 0.5;
    }
    u.swap(trial);
    grad = post.Gradient(u);
  }
  report.merits = MeritVector(u);
  if (!report.converged) {
    throw NonConvergenceError(
        "MAP Newton stopped after " + std::to_string(report.iterations) +
            " iterations with gradient norm " +
            std::to_string(report.residual),
        std::move(report));
  }
  return report;
}

}  // namespace fairgrade
