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

// Sample-based estimates of the risk functionals R_T1 and R_T3 from draws
// w ~ q. Both estimators accumulate per-sample quantities over the data
// points and aggregate at the end:
//
//   R_T1: per_x(x) = mean_i r(w_i, x),                estimate = max_x per_x(x)
//   R_T3: grad(e)  = mean_i (r(w_i,u) - r(w_i,v)) / l_e per edge e = (u, v),
//         per_x(x) = p(x)/2 * sum_{e incident to x} grad(e)^2,
//         estimate = sqrt(sum_x per_x(x))
//
// The R_T3 split charges half of each edge weight (p(u) + p(v))/2 to either
// endpoint, so that sum_x per_x is the discrete H^1(p) energy of the mean
// risk. The T3 estimate squares sample means and is biased upward at finite n.

#ifndef TDP_ESTIMATORS_HPP_
#define TDP_ESTIMATORS_HPP_

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tdp/error.hpp"
#include "tdp/graph.hpp"
#include "tdp/mechanism.hpp"
#include "tdp/spaces.hpp"

namespace tdp {

enum class EstimateTarget { kR_T1, kR_T3 };

constexpr std::string_view target_name(EstimateTarget t) {
  return t == EstimateTarget::kR_T1 ? "R_T1" : "R_T3";
}

struct EstimateReport {
  EstimateTarget target = EstimateTarget::kR_T1;
  double estimate = 0.0;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  Vector per_x_values;
  Vector per_edge_values;  // mean edge gradients; R_T3 only
};

// Fraction of the n draws that landed on each output.
inline Vector sample_frequencies(const GibbsMechanism& m, const Distribution& p, std::size_t n,
                                 std::uint64_t seed) {
  const Distribution q = gibbs_output(m, p);
  Vector freq = Vector::Zero(static_cast<Eigen::Index>(q.size()));
  for (std::size_t w : sample_indices(q, n, seed)) freq[static_cast<Eigen::Index>(w)] += 1.0;
  return freq / static_cast<double>(n);
}

namespace detail {

// sum_w freq(w) rows(w), accumulated as rows(0) + sum_w freq(w) (rows(w) - rows(0)).
// Sample means of rows that agree are then reproduced exactly.
inline Vector frequency_weighted_mean(const Vector& freq, const Matrix& rows) {
  const Matrix relative = rows.rowwise() - rows.row(0);
  return rows.row(0).transpose() + relative.transpose() * freq;
}

}  // namespace detail

inline EstimateReport estimate_R_T1(const GibbsMechanism& m, const Distribution& p, std::size_t n,
                                    std::uint64_t seed) {
  Vector per_x = detail::frequency_weighted_mean(sample_frequencies(m, p, n, seed), m.risk().values());
  EstimateReport report;
  report.target = EstimateTarget::kR_T1;
  report.estimate = per_x.maxCoeff();
  report.sample_count = n;
  report.seed = seed;
  report.per_x_values = std::move(per_x);
  return report;
}

// Oracle returning the per-edge discrete gradient of r(w, .) for output w.
template <class F>
concept GradientOracle = requires(F f, std::size_t w) {
  { f(w) } -> std::convertible_to<Vector>;
};

// Gradients read off the risk table itself.
inline auto risk_gradient_oracle(const RiskTable& risk, const MetricGraph& graph) {
  return [&risk, &graph](std::size_t w) -> Vector {
    return edge_gradient(risk.values().row(static_cast<Eigen::Index>(w)).transpose(), graph);
  };
}

template <GradientOracle Oracle>
EstimateReport estimate_R_T3(const GibbsMechanism& m, const Distribution& p,
                             const GraphLaplacian& laplacian, Oracle&& oracle, std::size_t n,
                             std::uint64_t seed) {
  require_same_space(laplacian.space(), m.risk().data(), "Laplacian is not over the data space");
  const auto& edges = laplacian.graph().edges();
  const Vector freq = sample_frequencies(m, p, n, seed);

  // Only sampled outputs (and the reference row 0) are queried.
  Matrix grads = Matrix::Zero(freq.size(), static_cast<Eigen::Index>(edges.size()));
  for (Eigen::Index w = 0; w < freq.size(); ++w) {
    if (w != 0 && freq[w] == 0.0) continue;
    const Vector g = oracle(static_cast<std::size_t>(w));
    if (g.size() != grads.cols()) throw Error(ErrorCode::kLengthMismatch, "oracle gradient has the wrong length");
    grads.row(w) = g.transpose();
  }
  for (Eigen::Index w = 1; w < freq.size(); ++w) {
    if (freq[w] == 0.0) grads.row(w) = grads.row(0);
  }
  const Vector grad = detail::frequency_weighted_mean(freq, grads);

  const Distribution& base = laplacian.base();
  Vector per_x = Vector::Zero(static_cast<Eigen::Index>(base.size()));
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double sq = grad[static_cast<Eigen::Index>(i)] * grad[static_cast<Eigen::Index>(i)];
    per_x[static_cast<Eigen::Index>(edges[i].u)] += 0.5 * base[edges[i].u] * sq;
    per_x[static_cast<Eigen::Index>(edges[i].v)] += 0.5 * base[edges[i].v] * sq;
  }

  EstimateReport report;
  report.target = EstimateTarget::kR_T3;
  report.estimate = std::sqrt(per_x.sum());
  report.sample_count = n;
  report.seed = seed;
  report.per_x_values = std::move(per_x);
  report.per_edge_values = grad;
  return report;
}

inline EstimateReport estimate_R_T3(const GibbsMechanism& m, const Distribution& p,
                                    const GraphLaplacian& laplacian, std::size_t n, std::uint64_t seed) {
  return estimate_R_T3(m, p, laplacian, risk_gradient_oracle(m.risk(), laplacian.graph()), n, seed);
}

}  // namespace tdp

#endif  // TDP_ESTIMATORS_HPP_
