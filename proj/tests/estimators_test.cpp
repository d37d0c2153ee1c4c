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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "tdp/certification.hpp"
#include "tdp/estimators.hpp"

namespace tdp {
namespace {

GibbsMechanism random_mechanism(std::size_t nw, std::size_t nx, std::mt19937_64& rng, double beta) {
  Matrix r(static_cast<Eigen::Index>(nw), static_cast<Eigen::Index>(nx));
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = testing::uniform(rng, 0, 1);
  return GibbsMechanism(RiskTable(FiniteSpace::indexed("w", nw), FiniteSpace::indexed("x", nx), r), beta);
}

// Root-mean-square error over a fixed set of seeds, for n in {1e3, 1e4, 1e5}.
template <class Estimate>
double error_slope(Estimate&& estimate, double exact) {
  const std::vector<double> ns = {1e3, 1e4, 1e5};
  std::vector<double> errors;
  for (double n : ns) {
    double sq = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const double e = estimate(static_cast<std::size_t>(n), seed) - exact;
      sq += e * e;
    }
    errors.push_back(std::sqrt(sq / 20));
  }
  return loglog_slope(ns, errors);
}

TEST(EstimateT1Test, DegenerateCases) {
  std::mt19937_64 rng(101);
  const auto single = random_mechanism(1, 6, rng, 1.0);
  const auto X = single.risk().data();
  const auto p = testing::random_positive_distribution(X, rng);
  for (std::size_t n : {1u, 7u, 1000u}) {
    EXPECT_EQ(estimate_R_T1(single, p, n, 3).estimate, single.risk().values().maxCoeff());
  }
  const GibbsMechanism constant(RiskTable(FiniteSpace::indexed("w", 4), X, Matrix::Constant(4, 6, 0.3)), 1.5);
  for (std::size_t n : {1u, 13u, 5000u}) EXPECT_EQ(estimate_R_T1(constant, p, n, n).estimate, 0.3);
}

TEST(EstimateT1Test, ReportContents) {
  std::mt19937_64 rng(103);
  const auto m = random_mechanism(5, 8, rng, 1.0);
  const auto p = Distribution::uniform(m.risk().data());
  const auto a = estimate_R_T1(m, p, 2000, 77);
  const auto b = estimate_R_T1(m, p, 2000, 77);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.per_x_values, b.per_x_values);
  EXPECT_EQ(a.sample_count, 2000u);
  EXPECT_EQ(a.seed, 77u);
  EXPECT_EQ(a.estimate, a.per_x_values.maxCoeff());
  EXPECT_LE(a.estimate, m.risk().max_entry());
}

TEST(EstimateT1Test, ConvergesAtMonteCarloRate) {
  std::mt19937_64 rng(107);
  const auto m = random_mechanism(5, 8, rng, 1.0);
  const auto p = testing::random_positive_distribution(m.risk().data(), rng);
  const double exact = theorem_R(m, p, Theorem::kT1);
  const double slope = error_slope([&](std::size_t n, std::uint64_t seed) { return estimate_R_T1(m, p, n, seed).estimate; }, exact);
  EXPECT_NEAR(slope, -0.5, 0.2);
}

TEST(EstimateT3Test, DegenerateCases) {
  std::mt19937_64 rng(109);
  const auto X = FiniteSpace::indexed("x", 6);
  const auto p = testing::random_positive_distribution(X, rng);
  const auto L = build_laplacian(testing::random_connected_graph(X, rng), p);

  Matrix flat(3, 6);
  for (Eigen::Index w = 0; w < 3; ++w) flat.row(w).setConstant(testing::uniform(rng, 0, 1));
  const GibbsMechanism constant_in_x(RiskTable(FiniteSpace::indexed("w", 3), X, flat), 1.0);
  EXPECT_EQ(estimate_R_T3(constant_in_x, p, L, 500, 1).estimate, 0.0);

  const GibbsMechanism single(RiskTable(FiniteSpace::indexed("w", 1), X, Matrix::Random(1, 6).cwiseAbs()), 1.0);
  // No sampling variance; only the summation order differs from h1_norm.
  EXPECT_DOUBLE_EQ(estimate_R_T3(single, p, L, 37, 2).estimate, h1_norm(single.risk().values().row(0).transpose(), L));
}

TEST(EstimateT3Test, PerXAggregationAndOracle) {
  std::mt19937_64 rng(113);
  const auto m = random_mechanism(4, 7, rng, 1.3);
  const auto X = m.risk().data();
  const auto p = testing::random_positive_distribution(X, rng);
  const auto L = build_laplacian(testing::random_connected_graph(X, rng), p);
  const auto report = estimate_R_T3(m, p, L, 4000, 5);
  EXPECT_NEAR(report.estimate, std::sqrt(report.per_x_values.sum()), 1e-15);
  EXPECT_EQ(report.per_edge_values.size(), static_cast<Eigen::Index>(L.graph().edges().size()));
  // The per-x split reproduces the edge-weighted energy.
  EXPECT_NEAR(report.per_x_values.sum(),
              L.edge_weights().dot(report.per_edge_values.cwiseProduct(report.per_edge_values)), 1e-14);

  // A user-supplied oracle: gradients of 2 r give twice the estimate.
  const auto doubled = estimate_R_T3(m, p, L,
                                     [&](std::size_t w) -> Vector {
                                       return 2.0 * edge_gradient(m.risk().values().row(static_cast<Eigen::Index>(w)).transpose(), L.graph());
                                     },
                                     4000, 5);
  EXPECT_NEAR(doubled.estimate, 2 * report.estimate, 1e-13);

  const auto again = estimate_R_T3(m, p, L, 4000, 5);
  EXPECT_EQ(again.estimate, report.estimate);
  EXPECT_EQ(again.per_x_values, report.per_x_values);
}

TEST(EstimateT3Test, ConvergesAtMonteCarloRate) {
  std::mt19937_64 rng(127);
  const auto m = random_mechanism(5, 8, rng, 1.0);
  const auto X = m.risk().data();
  const auto p = testing::random_positive_distribution(X, rng);
  const auto L = build_laplacian(testing::random_connected_graph(X, rng), p);
  const double exact = theorem_R(m, p, Theorem::kT3, &L);
  const double slope =
      error_slope([&](std::size_t n, std::uint64_t seed) { return estimate_R_T3(m, p, L, n, seed).estimate; }, exact);
  EXPECT_NEAR(slope, -0.5, 0.2);
}

}  // namespace
}  // namespace tdp
