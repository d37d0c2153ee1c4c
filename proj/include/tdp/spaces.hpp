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

// Finite spaces, probability vectors and tangent vectors (zero-mass signed
// measures) over them, plus the TV and sup norms.

#ifndef TDP_SPACES_HPP_
#define TDP_SPACES_HPP_

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tdp/error.hpp"

namespace tdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Absolute tolerance for "sums to one" and "sums to zero".
inline constexpr double kSimplexTolerance = 1e-12;

// An ordered set of opaque labels. Copies share the label storage.
class FiniteSpace {
 public:
  explicit FiniteSpace(std::vector<std::string> labels) {
    if (labels.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "a finite space needs at least one element");
    }
    auto impl = std::make_shared<Impl>();
    impl->index.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!impl->index.emplace(labels[i], i).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate label '" + labels[i] + "'");
      }
    }
    impl->labels = std::move(labels);
    impl_ = std::move(impl);
  }

  // Labels prefix0, prefix1, ...
  static FiniteSpace indexed(std::string_view prefix, std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::string(prefix) + std::to_string(i));
    return FiniteSpace(std::move(labels));
  }

  std::size_t size() const { return impl_->labels.size(); }
  const std::string& label(std::size_t i) const { return impl_->labels.at(i); }
  std::span<const std::string> labels() const { return impl_->labels; }

  std::optional<std::size_t> find(std::string_view label) const {
    auto it = impl_->index.find(std::string(label));
    if (it == impl_->index.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const FiniteSpace& a, const FiniteSpace& b) {
    return a.impl_ == b.impl_ || a.impl_->labels == b.impl_->labels;
  }

 private:
  struct Impl {
    std::vector<std::string> labels;
    std::unordered_map<std::string, std::size_t> index;
  };
  std::shared_ptr<const Impl> impl_;
};

inline void require_same_space(const FiniteSpace& a, const FiniteSpace& b, std::string_view what) {
  if (!(a == b)) throw Error(ErrorCode::kSpaceMismatch, std::string(what));
}

// A probability vector: nonnegative weights summing to one.
class Distribution {
 public:
  // Validates without renormalizing; use make_distribution() for raw weights.
  Distribution(FiniteSpace space, Vector weights)
      : space_(std::move(space)), weights_(std::move(weights)) {
    if (static_cast<std::size_t>(weights_.size()) != space_.size()) {
      throw Error(ErrorCode::kLengthMismatch, "weights do not match the space size");
    }
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      if (!std::isfinite(weights_[i])) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite weight");
      }
      if (weights_[i] < 0) {
        throw Error(ErrorCode::kNegativeWeight, "weight of '" + space_.label(i) + "' is negative");
      }
    }
    if (std::abs(weights_.sum() - 1.0) > kSimplexTolerance) {
      throw Error(ErrorCode::kInvalidArgument, "weights do not sum to one");
    }
  }

  static Distribution uniform(FiniteSpace space) {
    const auto n = static_cast<Eigen::Index>(space.size());
    return Distribution(std::move(space), Vector::Constant(n, 1.0 / static_cast<double>(n)));
  }

  const FiniteSpace& space() const { return space_; }
  const Vector& weights() const { return weights_; }
  std::size_t size() const { return space_.size(); }
  double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }

 private:
  FiniteSpace space_;
  Vector weights_;
};

// A signed measure of total mass zero: a direction tangent to the simplex.
class TangentVector {
 public:
  TangentVector(FiniteSpace space, Vector values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != space_.size()) {
      throw Error(ErrorCode::kLengthMismatch, "values do not match the space size");
    }
    if (!values_.allFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite tangent entry");
    if (std::abs(values_.sum()) > kSimplexTolerance) {
      throw Error(ErrorCode::kInvalidArgument, "tangent vector does not have zero total mass");
    }
  }

  static TangentVector zero(FiniteSpace space) {
    const auto n = static_cast<Eigen::Index>(space.size());
    return TangentVector(std::move(space), Vector::Zero(n));
  }

  // to - from.
  static TangentVector between(const Distribution& to, const Distribution& from) {
    require_same_space(to.space(), from.space(), "difference of distributions on different spaces");
    return TangentVector(to.space(), to.weights() - from.weights());
  }

  const FiniteSpace& space() const { return space_; }
  const Vector& values() const { return values_; }
  std::size_t size() const { return space_.size(); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  TangentVector scaled(double c) const { return TangentVector(space_, c * values_); }

 private:
  FiniteSpace space_;
  Vector values_;
};

// Normalizes nonnegative raw weights onto the simplex.
inline Distribution make_distribution(const FiniteSpace& space, std::span<const double> raw) {
  if (raw.size() != space.size()) {
    throw Error(ErrorCode::kLengthMismatch, "expected " + std::to_string(space.size()) +
                                                " weights, got " + std::to_string(raw.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) throw Error(ErrorCode::kInvalidArgument, "non-finite weight");
    if (raw[i] < 0) {
      throw Error(ErrorCode::kNegativeWeight, "weight of '" + space.label(i) + "' is negative");
    }
    total += raw[i];
  }
  if (total == 0.0) throw Error(ErrorCode::kZeroMass, "all weights are zero");
  Vector weights(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) weights[static_cast<Eigen::Index>(i)] = raw[i] / total;
  return Distribution(space, std::move(weights));
}

inline Distribution make_distribution(const FiniteSpace& space, const Vector& raw) {
  return make_distribution(space, std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())));
}

// Number of atoms if p is uniform on its support, nullopt otherwise.
inline std::optional<std::size_t> empirical_atom_count(const Distribution& p) {
  std::size_t atoms = 0;
  for (std::size_t i = 0; i < p.size(); ++i) atoms += p[i] > 0 ? 1 : 0;
  const double expected = 1.0 / static_cast<double>(atoms);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0 && std::abs(p[i] - expected) > kSimplexTolerance) return std::nullopt;
  }
  return atoms;
}

struct LeaveOneOut {
  Distribution perturbed;
  TangentVector direction;  // perturbed - original
};

// Removes atom k from a uniform empirical distribution on N >= 2 atoms.
inline LeaveOneOut leave_one_out(const Distribution& p, std::size_t k) {
  const auto atoms = empirical_atom_count(p);
  if (!atoms || *atoms < 2) {
    throw Error(ErrorCode::kNotEmpirical, "distribution is not uniform on at least two atoms");
  }
  if (k >= p.size() || p[k] == 0.0) {
    throw Error(ErrorCode::kBadIndex, "index " + std::to_string(k) + " is not an atom");
  }
  const double remaining = 1.0 / static_cast<double>(*atoms - 1);
  Vector weights = Vector::Zero(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i != k && p[i] > 0) weights[static_cast<Eigen::Index>(i)] = remaining;
  }
  Distribution perturbed(p.space(), std::move(weights));
  TangentVector direction = TangentVector::between(perturbed, p);
  return {std::move(perturbed), std::move(direction)};
}

// Total variation with the factor-2 convention, i.e. the L1 norm.
inline double tv_norm(const TangentVector& e) { return e.values().lpNorm<1>(); }

inline double linf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

}  // namespace tdp

#endif  // TDP_SPACES_HPP_
