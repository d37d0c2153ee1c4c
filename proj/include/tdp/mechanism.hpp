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

// The entropically regularized risk minimizer p -> q on finite spaces:
//
//   q(w) = exp(-beta <r(w,.), p>) / sum_w' exp(-beta <r(w',.), p>).

#ifndef TDP_MECHANISM_HPP_
#define TDP_MECHANISM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tdp/error.hpp"
#include "tdp/spaces.hpp"

namespace tdp {

// Nonnegative risks r(w, x): rows are outputs, columns are data points.
class RiskTable {
 public:
  RiskTable(FiniteSpace outputs, FiniteSpace data, Matrix values)
      : outputs_(std::move(outputs)), data_(std::move(data)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.rows()) != outputs_.size() ||
        static_cast<std::size_t>(values_.cols()) != data_.size()) {
      throw Error(ErrorCode::kLengthMismatch, "risk table shape does not match its spaces");
    }
    if (!values_.allFinite()) throw Error(ErrorCode::kInvalidArgument, "risk table has non-finite entries");
    if ((values_.array() < 0).any()) {
      throw Error(ErrorCode::kInvalidArgument, "risk table has negative entries");
    }
  }

  const FiniteSpace& outputs() const { return outputs_; }
  const FiniteSpace& data() const { return data_; }
  const Matrix& values() const { return values_; }
  double operator()(std::size_t w, std::size_t x) const {
    return values_(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(x));
  }
  double max_entry() const { return values_.maxCoeff(); }

 private:
  FiniteSpace outputs_;
  FiniteSpace data_;
  Matrix values_;
};

class GibbsMechanism {
 public:
  // beta = 0 is accepted here (the constant, uniform mechanism); front ends
  // that configure a privacy run require beta > 0.
  GibbsMechanism(RiskTable risk, double beta) : risk_(std::move(risk)), beta_(beta) {
    if (!(beta_ >= 0) || !std::isfinite(beta_)) {
      throw Error(ErrorCode::kInvalidArgument, "beta must be finite and nonnegative");
    }
  }

  const RiskTable& risk() const { return risk_; }
  double beta() const { return beta_; }
  GibbsMechanism with_beta(double beta) const { return GibbsMechanism(risk_, beta); }

 private:
  RiskTable risk_;
  double beta_;
};

// v(w) = sum_x r(w,x) p(x).
inline Vector expected_risk(const GibbsMechanism& m, const Distribution& p) {
  require_same_space(m.risk().data(), p.space(), "distribution is not over the mechanism's data space");
  return m.risk().values() * p.weights();
}

namespace detail {

struct ShiftedExponent {
  Vector shifted;  // -beta v - max(-beta v) <= 0
  double log_sum;  // log sum exp(shifted) >= 0
};

inline ShiftedExponent shifted_exponent(const GibbsMechanism& m, const Distribution& p) {
  Vector a = -m.beta() * expected_risk(m, p);
  a.array() -= a.maxCoeff();
  const double s = a.array().exp().sum();
  return {std::move(a), std::log(s)};
}

}  // namespace detail

// Entries may underflow to zero once beta times the risk gap exceeds ~745;
// log_output() stays finite in that regime.
inline Distribution gibbs_output(const GibbsMechanism& m, const Distribution& p) {
  const auto [a, log_sum] = detail::shifted_exponent(m, p);
  Vector q = a.array().exp();
  q /= q.sum();
  return Distribution(m.risk().outputs(), std::move(q));
}

inline Vector log_output(const GibbsMechanism& m, const Distribution& p) {
  auto [a, log_sum] = detail::shifted_exponent(m, p);
  a.array() -= log_sum;
  return a;
}

// Exact inverse-CDF sampler over a finite distribution.
class ExactSampler {
 public:
  explicit ExactSampler(const Distribution& q) : cdf_(q.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) cdf_[i] = acc += q[i];
    // Pin the tail so that every u in [0, 1) lands inside the support.
    for (std::size_t i = q.size(); i-- > 0;) {
      if (q[i] > 0) {
        for (std::size_t j = i; j < q.size(); ++j) cdf_[j] = 1.0;
        break;
      }
    }
  }

  // The 53 high bits of one mt19937_64 draw give u in [0, 1); this keeps
  // streams identical across standard libraries.
  std::size_t operator()(std::mt19937_64& engine) const {
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

inline std::vector<std::size_t> sample_indices(const Distribution& q, std::size_t count,
                                               std::uint64_t seed) {
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "sample count must be positive");
  std::mt19937_64 engine(seed);
  const ExactSampler sampler(q);
  std::vector<std::size_t> out(count);
  for (auto& s : out) s = sampler(engine);
  return out;
}

inline std::vector<std::string> sample_output(const GibbsMechanism& m, const Distribution& p,
                                              std::size_t count, std::uint64_t seed) {
  const Distribution q = gibbs_output(m, p);
  std::vector<std::string> labels;
  labels.reserve(count);
  for (std::size_t i : sample_indices(q, count, seed)) labels.push_back(q.space().label(i));
  return labels;
}

struct LabeledPoint {
  double feature = 0.0;
  int label = 0;  // 0 or 1
};

// 0/1 loss of threshold classifiers. Row 2i is "t{i}+" (predicts 1 iff
// feature >= threshold i), row 2i+1 is "t{i}-" (the complement). Column j is
// point "x{j}".
inline RiskTable zero_one_risk_table(std::span<const LabeledPoint> points,
                                     std::span<const double> thresholds) {
  if (points.empty() || thresholds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one point and one threshold");
  }
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!std::isfinite(thresholds[i])) throw Error(ErrorCode::kInvalidArgument, "non-finite threshold");
    rows.push_back("t" + std::to_string(i) + "+");
    rows.push_back("t" + std::to_string(i) + "-");
  }
  Matrix r(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    const LabeledPoint& pt = points[j];
    if (pt.label != 0 && pt.label != 1) throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      const int predicted = pt.feature >= thresholds[i] ? 1 : 0;
      const auto col = static_cast<Eigen::Index>(j);
      r(static_cast<Eigen::Index>(2 * i), col) = predicted == pt.label ? 0.0 : 1.0;
      r(static_cast<Eigen::Index>(2 * i + 1), col) = predicted == pt.label ? 1.0 : 0.0;
    }
  }
  return RiskTable(FiniteSpace(std::move(rows)), FiniteSpace::indexed("x", points.size()),
                   std::move(r));
}

}  // namespace tdp

#endif  // TDP_MECHANISM_HPP_
