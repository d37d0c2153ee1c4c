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

// Exact differentials of p -> q and p -> log q at a base distribution p,
// in matrix form over W x X:
//
//   dA    = -beta (diag(q) - q q^T) r
//   dlogA = -beta (I - 1 q^T) r
//
// and a finite-difference check of the corresponding linearizations.

#ifndef TDP_TANGENT_MAPS_HPP_
#define TDP_TANGENT_MAPS_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tdp/error.hpp"
#include "tdp/mechanism.hpp"
#include "tdp/spaces.hpp"

namespace tdp {

enum class KernelKind { kOutput, kLogOutput };

class TangentMapKernel {
 public:
  TangentMapKernel(KernelKind kind, Matrix table, GibbsMechanism mechanism, Distribution base,
                   Distribution output)
      : kind_(kind),
        table_(std::move(table)),
        mechanism_(std::move(mechanism)),
        base_(std::move(base)),
        output_(std::move(output)) {}

  KernelKind kind() const { return kind_; }
  const Matrix& table() const { return table_; }
  const GibbsMechanism& mechanism() const { return mechanism_; }
  const Distribution& base() const { return base_; }
  // q = A(p).
  const Distribution& output() const { return output_; }

 private:
  KernelKind kind_;
  Matrix table_;
  GibbsMechanism mechanism_;
  Distribution base_;
  Distribution output_;
};

namespace detail {

// Both kernels annihilate risks that are constant in w, so r is replaced by
// r - r(w0, .) up front; tables constant in w then give exact zeros.
inline Matrix relative_risk(const Matrix& r) { return r.rowwise() - r.row(0); }

}  // namespace detail

// Differential of p -> A(p).
inline TangentMapKernel output_tangent_map(const GibbsMechanism& m, const Distribution& p) {
  Distribution q = gibbs_output(m, p);
  const Vector& qv = q.weights();
  const Matrix r = detail::relative_risk(m.risk().values());
  Matrix table = -m.beta() * (qv.asDiagonal() * r - qv * (qv.transpose() * r));
  return TangentMapKernel(KernelKind::kOutput, std::move(table), m, p, std::move(q));
}

// Differential of p -> log A(p).
inline TangentMapKernel log_output_tangent_map(const GibbsMechanism& m, const Distribution& p) {
  Distribution q = gibbs_output(m, p);
  const Matrix r = detail::relative_risk(m.risk().values());
  const Eigen::RowVectorXd mean = q.weights().transpose() * r;
  Matrix table = -m.beta() * (r.rowwise() - mean);
  return TangentMapKernel(KernelKind::kLogOutput, std::move(table), m, p, std::move(q));
}

inline Vector apply(const TangentMapKernel& kernel, const TangentVector& e) {
  require_same_space(kernel.base().space(), e.space(), "tangent vector is not over the data space");
  return kernel.table() * e.values();
}

// Largest h with p + h e >= 0.
inline double max_feasible_step(const Distribution& p, const TangentVector& e) {
  require_same_space(p.space(), e.space(), "direction is not over the distribution's space");
  double cap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (e[i] < 0) cap = std::min(cap, p[i] / -e[i]);
  }
  return cap;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "slope fit needs at least two matched points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct FdStep {
  double h = 0.0;
  double output_error = 0.0;  // ||A(p+he) - A(p) - h dA e||_1
  double log_error = 0.0;     // ||log A(p+he) - log A(p) - h dlogA e||_inf
};

struct FdReport {
  std::vector<FdStep> steps;
  // Fitted log-log slopes; empty when every error is at round-off level, in
  // which case the linearization is exact along e.
  std::optional<double> output_slope;
  std::optional<double> log_slope;

  bool passed(double min_slope = 1.8) const {
    return (!output_slope || *output_slope >= min_slope) && (!log_slope || *log_slope >= min_slope);
  }
};

// Errors at or below this level are treated as exact.
inline constexpr double kFdRoundoffFloor = 1e-13;

inline FdReport fd_validate(const GibbsMechanism& m, const Distribution& p, const TangentVector& e,
                            std::span<const double> steps) {
  if (steps.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two step sizes");
  const double cap = max_feasible_step(p, e);
  for (double h : steps) {
    if (!(h > 0) || !std::isfinite(h)) throw Error(ErrorCode::kInvalidArgument, "step sizes must be positive");
    if (h > cap) {
      std::ostringstream msg;
      msg << "step h=" << h << " leaves the simplex (largest feasible step " << cap << ")";
      throw Error(ErrorCode::kStepTooLarge, msg.str());
    }
  }

  const TangentMapKernel dA = output_tangent_map(m, p);
  const TangentMapKernel dlogA = log_output_tangent_map(m, p);
  const Vector linear_out = apply(dA, e);
  const Vector linear_log = apply(dlogA, e);
  const Vector q0 = dA.output().weights();
  const Vector log_q0 = log_output(m, p);

  FdReport report;
  std::vector<double> hs, out_errors, log_errors;
  bool out_degenerate = true, log_degenerate = true;
  for (double h : steps) {
    // No renormalization: e has zero mass, so p + h e is already on the simplex.
    const Distribution ph(p.space(), Vector((p.weights() + h * e.values()).cwiseMax(0.0)));
    FdStep step;
    step.h = h;
    step.output_error = (gibbs_output(m, ph).weights() - q0 - h * linear_out).lpNorm<1>();
    step.log_error = linf_norm(log_output(m, ph) - log_q0 - h * linear_log);
    out_degenerate = out_degenerate && step.output_error <= kFdRoundoffFloor;
    log_degenerate = log_degenerate && step.log_error <= kFdRoundoffFloor;
    hs.push_back(h);
    out_errors.push_back(step.output_error);
    log_errors.push_back(step.log_error);
    report.steps.push_back(step);
  }
  if (!out_degenerate) report.output_slope = loglog_slope(hs, out_errors);
  if (!log_degenerate) report.log_slope = loglog_slope(hs, log_errors);
  return report;
}

}  // namespace tdp

#endif  // TDP_TANGENT_MAPS_HPP_
