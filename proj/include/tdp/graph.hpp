// Copyright 2026 The tdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Metric-graph discretization of the weighted Sobolev pair H^1(p) / H^-1(p).
//
// For an edge e = (u, v) of length l_e the discrete gradient is
// (g(u) - g(v)) / l_e and the edge weight is (p(u) + p(v)) / 2. The Laplacian
// is L_p = G^T diag(weights) G, so that
//
//   ||g||_{H^1(p)}^2  = g^T L_p g,
//   ||e||_{H^-1(p)}^2 = e^T L_p^+ e   for zero-mass e.

#ifndef TDP_GRAPH_HPP_
#define TDP_GRAPH_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tdp/error.hpp"
#include "tdp/spaces.hpp"

namespace tdp {

inline constexpr double kSolverTolerance = 1e-10;

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double length = 1.0;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

class MetricGraph {
 public:
  MetricGraph(FiniteSpace space, std::vector<Edge> edges)
      : space_(std::move(space)), edges_(std::move(edges)) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    detail::DisjointSets components(space_.size());
    std::size_t merged = 0;
    for (const Edge& e : edges_) {
      if (e.u >= space_.size() || e.v >= space_.size()) {
        throw Error(ErrorCode::kBadIndex, "edge endpoint out of range");
      }
      if (e.u == e.v) {
        throw Error(ErrorCode::kInvalidArgument, "self-loop at '" + space_.label(e.u) + "'");
      }
      if (!(e.length > 0) || !std::isfinite(e.length)) {
        throw Error(ErrorCode::kInvalidArgument, "edge lengths must be positive and finite");
      }
      if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate edge " + space_.label(e.u) + " - " +
                                                     space_.label(e.v));
      }
      merged += components.unite(e.u, e.v) ? 1 : 0;
    }
    if (merged + 1 != space_.size()) throw Error(ErrorCode::kDisconnected, "graph is not connected");
  }

  // x0 - x1 - ... - x{n-1} with unit lengths.
  static MetricGraph path(FiniteSpace space, double length = 1.0) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i + 1 < space.size(); ++i) edges.push_back({i, i + 1, length});
    return MetricGraph(std::move(space), std::move(edges));
  }

  const FiniteSpace& space() const { return space_; }
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  FiniteSpace space_;
  std::vector<Edge> edges_;
};

// Per-edge discrete gradient (g(u) - g(v)) / length.
inline Vector edge_gradient(const Vector& g, const MetricGraph& graph) {
  if (static_cast<std::size_t>(g.size()) != graph.space().size()) {
    throw Error(ErrorCode::kLengthMismatch, "function length does not match the graph");
  }
  Vector grad(static_cast<Eigen::Index>(graph.edges().size()));
  for (std::size_t i = 0; i < graph.edges().size(); ++i) {
    const Edge& e = graph.edges()[i];
    grad[static_cast<Eigen::Index>(i)] =
        (g[static_cast<Eigen::Index>(e.u)] - g[static_cast<Eigen::Index>(e.v)]) / e.length;
  }
  return grad;
}

class GraphLaplacian;
GraphLaplacian build_laplacian(const MetricGraph& graph, const Distribution& p);

// The p-weighted Laplacian together with a factorization of its
// rank-one-regularized form L + c 11^T, which is SPD for connected graphs
// and agrees with L on the zero-mass subspace.
class GraphLaplacian {
 public:
  const MetricGraph& graph() const { return state_->graph; }
  const Distribution& base() const { return state_->base; }
  const Matrix& matrix() const { return state_->matrix; }
  const Vector& edge_weights() const { return state_->weights; }
  const FiniteSpace& space() const { return state_->graph.space(); }
  std::size_t size() const { return space().size(); }

  // g^T L g, accumulated edge by edge so that it is exactly zero on
  // constants and never negative.
  double quadratic(const Vector& g) const {
    const Vector grad = edge_gradient(g, graph());
    return state_->weights.dot(grad.cwiseProduct(grad));
  }

  // Zero-mass u with L u = rhs - mean(rhs).
  Vector solve(const Vector& rhs) const {
    if (static_cast<std::size_t>(rhs.size()) != size()) {
      throw Error(ErrorCode::kLengthMismatch, "right-hand side does not match the Laplacian");
    }
    const Vector b = rhs.array() - rhs.mean();
    const double b_norm = b.norm();
    if (b_norm == 0.0) return Vector::Zero(rhs.size());
    Vector u = state_->factor.solve(b);
    // Two rounds of iterative refinement against L itself.
    for (int round = 0; round < 2; ++round) {
      u.array() -= u.mean();
      const Vector residual = b - state_->matrix * u;
      u += state_->factor.solve(residual);
    }
    u.array() -= u.mean();
    const double residual = (state_->matrix * u - b).norm();
    if (!(residual <= kSolverTolerance * b_norm)) {
      throw Error(ErrorCode::kSolverFailure,
                  "Laplacian solve reached relative residual " + std::to_string(residual / b_norm));
    }
    return u;
  }

 private:
  friend GraphLaplacian build_laplacian(const MetricGraph& graph, const Distribution& p);

  struct State {
    MetricGraph graph;
    Distribution base;
    Vector weights;
    Matrix matrix;
    Eigen::LLT<Matrix> factor;
  };

  explicit GraphLaplacian(std::shared_ptr<const State> state) : state_(std::move(state)) {}

  std::shared_ptr<const State> state_;
};

inline GraphLaplacian build_laplacian(const MetricGraph& graph, const Distribution& p) {
  require_same_space(graph.space(), p.space(), "graph and distribution live on different spaces");
  const std::size_t n = graph.space().size();
  const auto& edges = graph.edges();

  Vector weights(static_cast<Eigen::Index>(edges.size()));
  Matrix L = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  detail::DisjointSets components(n);
  std::size_t merged = 0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const double w = 0.5 * (p[e.u] + p[e.v]);
    weights[static_cast<Eigen::Index>(i)] = w;
    if (w > 0) merged += components.unite(e.u, e.v) ? 1 : 0;
    const double c = w / (e.length * e.length);
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    L(u, u) += c;
    L(v, v) += c;
    L(u, v) -= c;
    L(v, u) -= c;
  }
  if (merged + 1 != n) {
    throw Error(ErrorCode::kDisconnected,
                "edges with positive weight under p do not connect the graph");
  }

  const double shift = n > 1 ? L.trace() / static_cast<double>(n * n) : 1.0;
  Matrix regularized = L;
  regularized.array() += shift;
  Eigen::LLT<Matrix> factor(regularized);
  if (factor.info() != Eigen::Success) {
    throw Error(ErrorCode::kSolverFailure, "Cholesky factorization of the Laplacian failed");
  }
  return GraphLaplacian(std::make_shared<const GraphLaplacian::State>(GraphLaplacian::State{
      graph, p, std::move(weights), std::move(L), std::move(factor)}));
}

// sqrt(g^T L_p g). Seminorm: zero on constants.
inline double h1_norm(const Vector& g, const GraphLaplacian& laplacian) {
  return std::sqrt(laplacian.quadratic(g));
}

// sqrt(e^T L_p^+ e), via a zero-mass solve of L_p u = e.
inline double hm1_norm(const TangentVector& e, const GraphLaplacian& laplacian) {
  require_same_space(e.space(), laplacian.space(), "tangent vector and Laplacian spaces differ");
  const Vector u = laplacian.solve(e.values());
  return std::sqrt(std::max(0.0, e.values().dot(u)));
}

}  // namespace tdp

#endif  // TDP_GRAPH_HPP_
