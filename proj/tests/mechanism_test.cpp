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
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "tdp/mechanism.hpp"
#include "tdp/tangent_maps.hpp"

namespace tdp {
namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

GibbsMechanism mechanism(const Matrix& r, double beta) {
  return GibbsMechanism(RiskTable(FiniteSpace::indexed("w", static_cast<std::size_t>(r.rows())),
                                  FiniteSpace::indexed("x", static_cast<std::size_t>(r.cols())), r),
                        beta);
}

Distribution dist(std::initializer_list<double> w) {
  Vector v(static_cast<Eigen::Index>(w.size()));
  Eigen::Index i = 0;
  for (double x : w) v[i++] = x;
  return make_distribution(FiniteSpace::indexed("x", w.size()), v);
}

TEST(RiskTableTest, Validation) {
  const auto W = FiniteSpace::indexed("w", 2), X = FiniteSpace::indexed("x", 2);
  EXPECT_THROW(RiskTable(W, X, mat({{0, -1}, {0, 0}})), Error);
  EXPECT_THROW(RiskTable(W, X, mat({{0, 1, 2}, {0, 0, 0}})), Error);
  EXPECT_THROW(RiskTable(W, X, mat({{0, NAN}, {0, 0}})), Error);
  EXPECT_THROW(GibbsMechanism(RiskTable(W, X, mat({{0, 1}, {1, 0}})), -1.0), Error);
}

TEST(ExpectedRiskTest, Examples) {
  EXPECT_EQ(expected_risk(mechanism(Matrix::Zero(3, 2), 1.0), dist({1, 3})), Vector::Zero(3));
  EXPECT_EQ(expected_risk(mechanism(mat({{0, 1}, {1, 0}}), 1.0), dist({1, 1})), Eigen::Vector2d(0.5, 0.5));
  EXPECT_TRUE(expected_risk(mechanism(mat({{0, 1}, {2, 3}}), 1.0), dist({0.25, 0.75}))
                  .isApprox(Eigen::Vector2d(0.75, 2.75), 1e-15));
  try {
    expected_risk(mechanism(mat({{0, 1}}), 1.0), dist({1, 1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSpaceMismatch);
  }
}

TEST(GibbsOutputTest, Examples) {
  const auto constant = gibbs_output(mechanism(Matrix::Constant(4, 3, 0.7), 1.9), dist({1, 2, 3}));
  for (std::size_t w = 0; w < 4; ++w) EXPECT_NEAR(constant[w], 0.25, 1e-16);

  const auto m = mechanism(mat({{0}, {1}}), std::numbers::ln2);
  const auto q = gibbs_output(m, dist({1}));
  EXPECT_NEAR(q[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(q[1], 1.0 / 3.0, 1e-15);
}

TEST(GibbsOutputTest, MatchesNaiveFormula) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix r(5, 7);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = testing::uniform(rng, 0, 3);
    const auto p = testing::random_positive_distribution(FiniteSpace::indexed("x", 7), rng);
    const Vector q = gibbs_output(mechanism(r, 1.3), p).weights();
    const Vector naive = testing::naive_gibbs(r, p.weights(), 1.3);
    EXPECT_LT(((q - naive).array() / naive.array()).abs().maxCoeff(), 1e-12);
  }
}

TEST(GibbsOutputTest, NoOverflowAtLargeBeta) {
  // beta * max(v) = 1e6.
  const auto m = mechanism(mat({{1.0}, {1.0 + 1e-6}, {2.0}}), 5e5);
  const auto q = gibbs_output(m, dist({1}));
  EXPECT_TRUE(q.weights().allFinite());
  EXPECT_NEAR(q.weights().sum(), 1.0, 1e-12);
  EXPECT_NEAR(q[0], 1.0 / (1.0 + std::exp(-0.5)), 1e-9);
  const Vector lq = log_output(m, dist({1}));
  EXPECT_TRUE(lq.allFinite());
  EXPECT_NEAR(lq[2], -5e5 - std::log(1.0 + std::exp(-0.5)), 1e-6);
}

TEST(LogOutputTest, Examples) {
  const Vector uniform = log_output(mechanism(Matrix::Constant(5, 2, 0.3), 1.0), dist({1, 1}));
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(uniform[i], -std::log(5.0), 1e-15);

  const Vector two = log_output(mechanism(mat({{0}, {1}}), std::numbers::ln2), dist({1}));
  EXPECT_NEAR(two[0], std::log(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(two[1], std::log(1.0 / 3.0), 1e-15);

  std::mt19937_64 rng(2);
  Matrix r(4, 3);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = testing::uniform(rng, 0, 5);
  const Vector cold = log_output(mechanism(r, 0.0), dist({1, 2, 3}));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(cold[i], -std::log(4.0));
}

TEST(LogOutputTest, ExpMatchesGibbsOutput) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = testing::random_instance(rng);
    const Vector q = gibbs_output(inst.mechanism, inst.p).weights();
    const Vector lq = log_output(inst.mechanism, inst.p);
    EXPECT_LT((lq.array().exp() - q.array()).abs().maxCoeff(), 1e-14);
  }
}

TEST(SampleOutputTest, DegenerateDistribution) {
  const auto q = make_distribution(FiniteSpace::indexed("w", 2), Eigen::Vector2d(1, 0));
  for (std::size_t w : sample_indices(q, 1000, 99)) EXPECT_EQ(w, 0u);
  // exp(-1000) underflows, so q = [1, 0] through the mechanism too.
  for (const auto& label : sample_output(mechanism(mat({{0}, {1000}}), 1.0), dist({1}), 1000, 5)) {
    EXPECT_EQ(label, "w0");
  }
}

TEST(SampleOutputTest, BinomialConcentration) {
  const auto m = mechanism(mat({{0}, {1}}), std::numbers::ln2);
  const std::size_t count = 300000;
  const auto samples = sample_output(m, dist({1}), count, 20240101);
  double hits = 0;
  for (const auto& s : samples) hits += s == "w0" ? 1 : 0;
  const double q = 2.0 / 3.0;
  EXPECT_LT(std::abs(hits / count - q), 3.0 * std::sqrt(q * (1 - q) / count));
}

TEST(SampleOutputTest, Deterministic) {
  std::mt19937_64 rng(8);
  const auto inst = testing::random_instance(rng);
  EXPECT_EQ(sample_output(inst.mechanism, inst.p, 500, 42), sample_output(inst.mechanism, inst.p, 500, 42));
  EXPECT_NE(sample_output(inst.mechanism, inst.p, 500, 42), sample_output(inst.mechanism, inst.p, 500, 43));
  EXPECT_THROW(sample_output(inst.mechanism, inst.p, 0, 1), Error);
}

TEST(SampleOutputTest, TvConvergenceRate) {
  std::mt19937_64 rng(17);
  const auto inst = testing::random_instance(rng, 6, 6, 1.0);
  const Vector q = gibbs_output(inst.mechanism, inst.p).weights();
  const std::vector<double> counts = {1e3, 1e4, 1e5};
  std::vector<double> errors;
  for (double n : counts) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
      Vector freq = Vector::Zero(q.size());
      for (std::size_t w : sample_indices(gibbs_output(inst.mechanism, inst.p), static_cast<std::size_t>(n), seed)) {
        freq[static_cast<Eigen::Index>(w)] += 1.0 / n;
      }
      total += (freq - q).lpNorm<1>();
    }
    errors.push_back(total / 16);
  }
  EXPECT_NEAR(loglog_slope(counts, errors), -0.5, 0.15);
}

TEST(GibbsPropertiesTest, NormalizationShiftAndLimits) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = testing::random_instance(rng);
    const auto q = gibbs_output(inst.mechanism, inst.p);
    EXPECT_NEAR(q.weights().sum(), 1.0, 1e-12);
    EXPECT_GT(q.weights().minCoeff(), 0.0);

    const Matrix shifted = inst.mechanism.risk().values().array() + 2.5;
    const auto qs = gibbs_output(GibbsMechanism(RiskTable(inst.mechanism.risk().outputs(),
                                                          inst.mechanism.risk().data(), shifted),
                                                inst.mechanism.beta()),
                                 inst.p);
    EXPECT_LT((qs.weights() - q.weights()).cwiseAbs().maxCoeff(), 1e-12);

    const auto hot = gibbs_output(inst.mechanism.with_beta(1e-12), inst.p);
    EXPECT_LT((hot.weights().array() - 1.0 / static_cast<double>(q.size())).abs().maxCoeff(), 1e-11);
  }
  // Integer-gap risks with a unique minimizer concentrate at beta = 1e4.
  const auto m = mechanism(mat({{2, 2}, {1, 1}, {3, 4}}), 1e4);
  EXPECT_NEAR(gibbs_output(m, dist({1, 1}))[1], 1.0, 1e-12);
}

TEST(GibbsPropertiesTest, MinimizerMassNondecreasingInBeta) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = testing::random_instance(rng);
    const Vector v = expected_risk(inst.mechanism, inst.p);
    Eigen::Index best;
    v.minCoeff(&best);
    double previous = 0.0;
    for (double beta = 0.0; beta <= 50.0; beta += 0.5) {
      const double mass = gibbs_output(inst.mechanism.with_beta(beta), inst.p)[static_cast<std::size_t>(best)];
      EXPECT_GE(mass, previous - 1e-15);
      previous = mass;
    }
  }
}

TEST(ZeroOneRiskTableTest, Examples) {
  const std::vector<LabeledPoint> one = {{0.3, 1}};
  const std::vector<double> t = {0.0};
  const auto single = zero_one_risk_table(one, t);
  EXPECT_EQ(single.values().rows(), 2);
  EXPECT_EQ(single.values().cols(), 1);
  EXPECT_EQ(single.values().sum(), 1.0);

  const std::vector<LabeledPoint> pts = {{0, 0}, {1, 1}};
  const std::vector<double> half = {0.5};
  const auto table = zero_one_risk_table(pts, half);
  EXPECT_EQ(table.values(), mat({{0, 0}, {1, 1}}));
  EXPECT_EQ(table.outputs().label(0), "t0+");
  EXPECT_EQ(table.outputs().label(1), "t0-");

  const std::vector<LabeledPoint> separable = {{-2, 0}, {-1, 0}, {1, 1}, {3, 1}};
  const std::vector<double> thresholds = {-3, 0, 2};
  const auto sep = zero_one_risk_table(separable, thresholds);
  EXPECT_EQ(sep.values().rowwise().sum().minCoeff(), 0.0);
  EXPECT_TRUE(((sep.values().array() == 0) || (sep.values().array() == 1)).all());

  const std::vector<LabeledPoint> bad = {{0, 2}};
  EXPECT_THROW(zero_one_risk_table(bad, half), Error);
  EXPECT_THROW(zero_one_risk_table(std::span<const LabeledPoint>(), half), Error);
}

}  // namespace
}  // namespace tdp
