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

// Induced operator norms of the tangent maps for the four (input, output)
// norm pairs, the risk functionals R, and certificates comparing the exact
// norm against 2 beta R.
//
// Closed forms, with M the kernel table (rows w, columns x):
//
//   TV  -> TV   ambient: max_x ||M e_x||_1
//               tangent: 1/2 max_{x,x'} ||M (e_x - e_x')||_1
//   TV  -> Linf ambient: max_{w,x} |M(w,x)|
//               tangent: 1/2 max_w (max_x M(w,x) - min_x M(w,x))
//   H-1 -> Linf         max_w ||M(w,.)||_{H^1(p)}
//   H-1 -> TV           max_{s in {-1,1}^W} ||M^T s||_{H^1(p)}
//
// The zero-mass unit TV ball is the convex hull of (e_x - e_x')/2, which gives
// the tangent forms. The H^-1 cases use duality with H^1; an H^-1 input is
// zero-mass by construction, so ambient and tangent coincide.

#ifndef TDP_CERTIFICATION_HPP_
#define TDP_CERTIFICATION_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "tdp/error.hpp"
#include "tdp/graph.hpp"
#include "tdp/mechanism.hpp"
#include "tdp/spaces.hpp"
#include "tdp/tangent_maps.hpp"

namespace tdp {

enum class InputNorm { kTV, kHM1 };
enum class OutputNorm { kTV, kLInf };

class NormPair {
 public:
  static NormPair tv_tv() { return NormPair(InputNorm::kTV, OutputNorm::kTV, std::nullopt); }
  static NormPair tv_linf() { return NormPair(InputNorm::kTV, OutputNorm::kLInf, std::nullopt); }
  static NormPair hm1_tv(GraphLaplacian laplacian) {
    return NormPair(InputNorm::kHM1, OutputNorm::kTV, std::move(laplacian));
  }
  static NormPair hm1_linf(GraphLaplacian laplacian) {
    return NormPair(InputNorm::kHM1, OutputNorm::kLInf, std::move(laplacian));
  }

  // Throws MissingLaplacian when an H^-1 input comes without a Laplacian.
  NormPair(InputNorm input, OutputNorm output, std::optional<GraphLaplacian> laplacian)
      : input_(input), output_(output), laplacian_(std::move(laplacian)) {
    if (input_ == InputNorm::kHM1 && !laplacian_) {
      throw Error(ErrorCode::kMissingLaplacian, "H^-1 input norm needs a graph Laplacian");
    }
    if (input_ == InputNorm::kTV) laplacian_.reset();
  }

  InputNorm input() const { return input_; }
  OutputNorm output() const { return output_; }
  const GraphLaplacian* laplacian() const { return laplacian_ ? &*laplacian_ : nullptr; }

  // CLI spelling: tv-tv, tv-linf, w2-tv, w2-linf.
  std::string name() const {
    return std::string(input_ == InputNorm::kTV ? "tv" : "w2") + (output_ == OutputNorm::kTV ? "-tv" : "-linf");
  }

 private:
  InputNorm input_;
  OutputNorm output_;
  std::optional<GraphLaplacian> laplacian_;
};

// A norm value, or an enclosing interval when it was not computed exactly.
struct NormValue {
  double lower = 0.0;
  double upper = 0.0;

  static NormValue exactly(double v) { return {v, v}; }
  bool exact() const { return lower == upper; }
};

struct OperatorNorm {
  NormValue ambient;  // sup over all signed measures
  NormValue tangent;  // sup over zero-mass inputs
};

struct OpNormOptions {
  std::size_t enumeration_limit = 20;  // largest |W| for exact H-1 -> TV
  std::size_t sign_draws = 1024;
  std::uint64_t seed = 0;
};

namespace detail {

// Edge gradients of every kernel row, one row per w.
inline Matrix row_gradients(const Matrix& table, const GraphLaplacian& laplacian) {
  const auto& edges = laplacian.graph().edges();
  Matrix grads(table.rows(), static_cast<Eigen::Index>(edges.size()));
  for (Eigen::Index w = 0; w < table.rows(); ++w) {
    grads.row(w) = edge_gradient(table.row(w).transpose(), laplacian.graph()).transpose();
  }
  return grads;
}

inline double weighted_square(const Eigen::RowVectorXd& grad, const Vector& weights) {
  return grad.cwiseProduct(grad).dot(weights.transpose());
}

}  // namespace detail

// max_s ||M^T s||_{H^1}, enumerating sign vectors in Gray-code order with the
// first sign fixed (s and -s give the same value).
inline double hm1_to_tv_enumerated(const Matrix& table, const GraphLaplacian& laplacian) {
  const Matrix grads = detail::row_gradients(table, laplacian);
  const Vector& weights = laplacian.edge_weights();
  const auto rows = static_cast<std::size_t>(grads.rows());
  if (rows > 62) throw Error(ErrorCode::kInvalidArgument, "too many rows to enumerate");

  std::vector<int> signs(rows, 1);
  Eigen::RowVectorXd current = grads.colwise().sum();
  double best = detail::weighted_square(current, weights);
  std::vector<int> best_signs = signs;
  const std::uint64_t count = std::uint64_t{1} << (rows - 1);
  for (std::uint64_t i = 1; i < count; ++i) {
    // Flip the row matching the lowest set bit of i; row 0 stays positive.
    const auto row = static_cast<std::size_t>(std::countr_zero(i)) + 1;
    signs[row] = -signs[row];
    current += 2.0 * signs[row] * grads.row(static_cast<Eigen::Index>(row));
    const double value = detail::weighted_square(current, weights);
    if (value > best) {
      best = value;
      best_signs = signs;
    }
  }
  Eigen::RowVectorXd exact = Eigen::RowVectorXd::Zero(grads.cols());
  for (std::size_t w = 0; w < rows; ++w) exact += best_signs[w] * grads.row(static_cast<Eigen::Index>(w));
  return std::sqrt(detail::weighted_square(exact, weights));
}

// [best of `draws` random sign vectors, sum_w ||M(w,.)||_{H^1}].
inline NormValue hm1_to_tv_bounds(const Matrix& table, const GraphLaplacian& laplacian,
                                  std::size_t draws, std::uint64_t seed) {
  const Matrix grads = detail::row_gradients(table, laplacian);
  const Vector& weights = laplacian.edge_weights();
  double upper = 0.0;
  for (Eigen::Index w = 0; w < grads.rows(); ++w) {
    upper += std::sqrt(detail::weighted_square(grads.row(w), weights));
  }
  std::mt19937_64 engine(seed);
  double lower = 0.0;
  Eigen::RowVectorXd combo(grads.cols());
  for (std::size_t d = 0; d < draws; ++d) {
    combo.setZero();
    for (Eigen::Index w = 0; w < grads.rows(); ++w) {
      combo += ((engine() >> 63) != 0 ? 1.0 : -1.0) * grads.row(w);
    }
    lower = std::max(lower, std::sqrt(detail::weighted_square(combo, weights)));
  }
  return {std::min(lower, upper), upper};
}

inline OperatorNorm op_norm(const TangentMapKernel& kernel, const NormPair& pair,
                            const OpNormOptions& options = {}) {
  const Matrix& M = kernel.table();
  if (pair.input() == InputNorm::kTV) {
    if (pair.output() == OutputNorm::kTV) {
      const double ambient = M.cols() == 0 ? 0.0 : M.cwiseAbs().colwise().sum().maxCoeff();
      double tangent = 0.0;
      for (Eigen::Index a = 0; a < M.cols(); ++a) {
        for (Eigen::Index b = a + 1; b < M.cols(); ++b) {
          tangent = std::max(tangent, 0.5 * (M.col(a) - M.col(b)).lpNorm<1>());
        }
      }
      return {NormValue::exactly(ambient), NormValue::exactly(tangent)};
    }
    const double ambient = M.cwiseAbs().maxCoeff();
    const double tangent = 0.5 * (M.rowwise().maxCoeff() - M.rowwise().minCoeff()).maxCoeff();
    return {NormValue::exactly(ambient), NormValue::exactly(tangent)};
  }

  const GraphLaplacian* laplacian = pair.laplacian();
  if (laplacian == nullptr) throw Error(ErrorCode::kMissingLaplacian, "H^-1 input norm needs a Laplacian");
  require_same_space(laplacian->space(), kernel.base().space(), "Laplacian is not over the data space");

  NormValue value;
  if (pair.output() == OutputNorm::kLInf) {
    double best = 0.0;
    for (Eigen::Index w = 0; w < M.rows(); ++w) best = std::max(best, h1_norm(M.row(w).transpose(), *laplacian));
    value = NormValue::exactly(best);
  } else if (static_cast<std::size_t>(M.rows()) <= options.enumeration_limit) {
    value = NormValue::exactly(hm1_to_tv_enumerated(M, *laplacian));
  } else {
    value = hm1_to_tv_bounds(M, *laplacian, options.sign_draws, options.seed);
  }
  return {value, value};
}

enum class Theorem { kT1, kT2, kT3, kT4 };

constexpr std::string_view theorem_name(Theorem t) {
  switch (t) {
    case Theorem::kT1: return "T1";
    case Theorem::kT2: return "T2";
    case Theorem::kT3: return "T3";
    case Theorem::kT4: return "T4";
  }
  return "?";
}

// (TV,TV) -> T1 on dA, (TV,Linf) -> T2 on dlogA,
// (H-1,TV) -> T3 on dA, (H-1,Linf) -> T4 on dlogA.
inline Theorem theorem_for(const NormPair& pair) {
  if (pair.input() == InputNorm::kTV) return pair.output() == OutputNorm::kTV ? Theorem::kT1 : Theorem::kT2;
  return pair.output() == OutputNorm::kTV ? Theorem::kT3 : Theorem::kT4;
}

// Smallest R meeting the theorem's hypothesis at (m, p):
//   T1: max_x sum_w q(w) r(w,x)        T2: max_{w,x} r(w,x)
//   T3: ||sum_w q(w) r(w,.)||_{H^1}    T4: max_w ||r(w,.)||_{H^1}
inline double theorem_R(const GibbsMechanism& m, const Distribution& p, Theorem theorem,
                        const GraphLaplacian* laplacian = nullptr) {
  const Matrix& r = m.risk().values();
  if ((theorem == Theorem::kT3 || theorem == Theorem::kT4)) {
    if (laplacian == nullptr) throw Error(ErrorCode::kMissingLaplacian, "T3/T4 need a graph Laplacian");
    require_same_space(laplacian->space(), m.risk().data(), "Laplacian is not over the data space");
  }
  switch (theorem) {
    case Theorem::kT1: {
      const Vector q = gibbs_output(m, p).weights();
      return (q.transpose() * r).maxCoeff();
    }
    case Theorem::kT2:
      return r.maxCoeff();
    case Theorem::kT3: {
      const Vector q = gibbs_output(m, p).weights();
      return h1_norm(r.transpose() * q, *laplacian);
    }
    case Theorem::kT4: {
      double best = 0.0;
      for (Eigen::Index w = 0; w < r.rows(); ++w) best = std::max(best, h1_norm(r.row(w).transpose(), *laplacian));
      return best;
    }
  }
  return 0.0;
}

inline constexpr double kDominanceTolerance = 1e-9;

enum class CertificateStatus { kSatisfied, kViolated, kInconclusive };

constexpr std::string_view status_name(CertificateStatus s) {
  switch (s) {
    case CertificateStatus::kSatisfied: return "satisfied";
    case CertificateStatus::kViolated: return "violated";
    case CertificateStatus::kInconclusive: return "inconclusive";
  }
  return "?";
}

struct Certificate {
  Theorem theorem = Theorem::kT1;
  std::string norm_pair;
  double beta = 0.0;
  double R = 0.0;
  double bound = 0.0;  // 2 beta R
  NormValue exact_ambient;
  NormValue exact_tangent;
  // Satisfied when the ambient norm is provably within bound + 1e-9,
  // violated when it provably exceeds it; an interval straddling the bound is
  // inconclusive.
  CertificateStatus status = CertificateStatus::kSatisfied;

  bool satisfied() const { return status == CertificateStatus::kSatisfied; }
};

inline Certificate certify(const GibbsMechanism& m, const Distribution& p, const NormPair& pair,
                           const OpNormOptions& options = {}) {
  Certificate cert;
  cert.theorem = theorem_for(pair);
  cert.norm_pair = pair.name();
  cert.beta = m.beta();
  cert.R = theorem_R(m, p, cert.theorem, pair.laplacian());
  cert.bound = 2.0 * m.beta() * cert.R;

  const TangentMapKernel kernel = pair.output() == OutputNorm::kTV ? output_tangent_map(m, p)
                                                                   : log_output_tangent_map(m, p);
  const OperatorNorm norm = op_norm(kernel, pair, options);
  cert.exact_ambient = norm.ambient;
  cert.exact_tangent = norm.tangent;
  const double limit = cert.bound + kDominanceTolerance;
  if (norm.ambient.upper <= limit) {
    cert.status = CertificateStatus::kSatisfied;
  } else if (norm.ambient.lower > limit) {
    cert.status = CertificateStatus::kViolated;
  } else {
    cert.status = CertificateStatus::kInconclusive;
  }
  return cert;
}

}  // namespace tdp

#endif  // TDP_CERTIFICATION_HPP_
