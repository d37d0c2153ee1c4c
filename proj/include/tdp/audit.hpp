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

// Audit runs behind the tdp_audit verbs: certify, loo, estimate, fdcheck.
// Each run loads the configured inputs, computes its section and returns the
// full report together with the process exit code.

#ifndef TDP_AUDIT_HPP_
#define TDP_AUDIT_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tdp/certification.hpp"
#include "tdp/error.hpp"
#include "tdp/estimators.hpp"
#include "tdp/graph.hpp"
#include "tdp/io.hpp"
#include "tdp/mechanism.hpp"
#include "tdp/report.hpp"
#include "tdp/spaces.hpp"
#include "tdp/tangent_maps.hpp"

namespace tdp::audit {

using report::Json;

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitCheckFailed = 3,
  kExitIo = 4,
};

inline int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::kParseError || e.code() == ErrorCode::kIoError ? kExitIo : kExitValidation;
}

// Slack for the leave-one-out check in the (TV, Linf) case, where the bound
// holds without a second-order term.
inline constexpr double kLooSlack = 1e-9;

struct AuditConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::string risk_path;
  std::string data_path;
  std::optional<std::string> graph_path;
  double beta = 1.0;
  std::string norm_pair = "tv-linf";
  std::optional<std::vector<std::size_t>> loo_indices;  // empty optional: all atoms
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  std::optional<std::string> output_path;
  std::vector<double> fd_steps = {1e-2, 5e-3, 2.5e-3};
  std::optional<EstimateTarget> estimate_target;

  bool wasserstein() const { return norm_pair.rfind("w2-", 0) == 0; }

  void validate() const {
    if (!(beta > 0) || !std::isfinite(beta)) throw Error(ErrorCode::kInvalidArgument, "beta must be > 0");
    if (norm_pair != "tv-tv" && norm_pair != "tv-linf" && norm_pair != "w2-tv" && norm_pair != "w2-linf") {
      throw Error(ErrorCode::kInvalidArgument, "unknown norm pair '" + norm_pair + "'");
    }
    if (wasserstein() && !graph_path) {
      throw Error(ErrorCode::kMissingGraph, "norm pair " + norm_pair + " needs graph_path");
    }
    if (samples == 0) throw Error(ErrorCode::kInvalidArgument, "samples must be positive");
    if (risk_path.empty() || data_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "risk_path and data_path are required");
    }
  }

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
};

inline AuditConfig parse_config(const Json& j, std::filesystem::path base_dir = {}) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");
  AuditConfig c;
  c.base_dir = std::move(base_dir);
  try {
    c.risk_path = j.value("risk_path", std::string());
    c.data_path = j.value("data_path", std::string());
    if (j.contains("graph_path") && !j["graph_path"].is_null()) c.graph_path = j["graph_path"].get<std::string>();
    c.beta = j.value("beta", c.beta);
    c.norm_pair = j.value("norm_pair", c.norm_pair);
    if (j.contains("loo_indices")) {
      const Json& loo = j["loo_indices"];
      if (loo.is_string()) {
        if (loo.get<std::string>() != "all") throw Error(ErrorCode::kParseError, "loo_indices must be \"all\" or a list");
      } else {
        c.loo_indices = loo.get<std::vector<std::size_t>>();
      }
    }
    c.samples = j.value("samples", c.samples);
    c.seed = j.value("seed", c.seed);
    if (j.contains("output_path") && !j["output_path"].is_null()) c.output_path = j["output_path"].get<std::string>();
    if (j.contains("fd_steps")) c.fd_steps = j["fd_steps"].get<std::vector<double>>();
    if (j.contains("estimate_target")) {
      const auto t = j["estimate_target"].get<std::string>();
      if (t == "R_T1") c.estimate_target = EstimateTarget::kR_T1;
      else if (t == "R_T3") c.estimate_target = EstimateTarget::kR_T3;
      else throw Error(ErrorCode::kParseError, "estimate_target must be R_T1 or R_T3");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  return c;
}

inline AuditConfig load_config(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

struct AuditInputs {
  RiskTable risk;
  Distribution data;
  std::optional<MetricGraph> graph;
  Json digests;
};

inline AuditInputs load_inputs(const AuditConfig& config) {
  Json digests = Json::object();
  const std::string risk_text = io::read_file(config.resolve(config.risk_path));
  RiskTable risk = io::parse_risk_table(risk_text, config.risk_path);
  digests["risk"] = Json{{"path", config.risk_path}, {"sha256", report::sha256_hex(risk_text)}};

  const std::string data_text = io::read_file(config.resolve(config.data_path));
  Distribution data = io::parse_distribution(data_text, risk.data(), config.data_path);
  digests["data"] = Json{{"path", config.data_path}, {"sha256", report::sha256_hex(data_text)}};

  std::optional<MetricGraph> graph;
  if (config.graph_path) {
    const std::string graph_text = io::read_file(config.resolve(*config.graph_path));
    graph = io::parse_graph(graph_text, risk.data(), *config.graph_path);
    digests["graph"] = Json{{"path", *config.graph_path}, {"sha256", report::sha256_hex(graph_text)}};
  }
  return {std::move(risk), std::move(data), std::move(graph), std::move(digests)};
}

struct AuditResult {
  Json report;
  int exit_code = kExitOk;
};

namespace detail {

struct Session {
  AuditConfig config;
  AuditInputs inputs;
  GibbsMechanism mechanism;
  std::optional<GraphLaplacian> laplacian;

  static Session open(const AuditConfig& config) {
    config.validate();
    AuditInputs inputs = load_inputs(config);
    GibbsMechanism mechanism(inputs.risk, config.beta);
    std::optional<GraphLaplacian> laplacian;
    if (inputs.graph) laplacian = build_laplacian(*inputs.graph, inputs.data);
    return Session{config, std::move(inputs), std::move(mechanism), std::move(laplacian)};
  }

  NormPair pair() const {
    const auto& name = config.norm_pair;
    if (name == "tv-tv") return NormPair::tv_tv();
    if (name == "tv-linf") return NormPair::tv_linf();
    if (!laplacian) throw Error(ErrorCode::kMissingGraph, "norm pair " + name + " needs a graph");
    return name == "w2-tv" ? NormPair::hm1_tv(*laplacian) : NormPair::hm1_linf(*laplacian);
  }

  Json meta(std::string_view verb) const {
    return Json{{"tool", "tdp_audit"},
                {"verb", std::string(verb)},
                {"beta", config.beta},
                {"norm_pair", config.norm_pair},
                {"seed", config.seed},
                {"inputs", inputs.digests}};
  }

  std::vector<std::size_t> loo_indices() const {
    const Distribution& p = inputs.data;
    if (!empirical_atom_count(p) || *empirical_atom_count(p) < 2) {
      throw Error(ErrorCode::kNotEmpirical, "data file is not a uniform empirical distribution on >= 2 atoms");
    }
    if (config.loo_indices) return *config.loo_indices;
    std::vector<std::size_t> all;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] > 0) all.push_back(i);
    }
    return all;
  }
};

}  // namespace detail

inline AuditResult run_certify(const AuditConfig& config) {
  const auto session = detail::Session::open(config);
  const Certificate cert = certify(session.mechanism, session.inputs.data, session.pair());
  AuditResult result;
  result.report = Json{{"meta", session.meta("certify")}, {"certificate", report::certificate_json(cert)}};
  result.exit_code = cert.status == CertificateStatus::kViolated ? kExitCheckFailed : kExitOk;
  return result;
}

struct LooRecord {
  std::size_t k = 0;
  std::string label;
  double tv_dist = 0.0;
  std::optional<double> hm1_dist;
  double sup_log_ratio = 0.0;  // max_w |log q(w) - log q'(w)|
  double observed = 0.0;       // change of the output in the pair's output norm
  double linear_pred = 0.0;    // output norm of the tangent map applied to p' - p
  double remainder = 0.0;      // output norm of (actual change - linear prediction)
  double bound_rhs = 0.0;      // 2 beta R times the input distance
  double slack = 0.0;
  bool ok = true;
};

// For (TV, Linf) the bound is checked with a fixed 1e-9 slack. For the other
// pairs the guarantee is first order, so the measured linearization
// remainder is added to the slack.
inline std::vector<LooRecord> loo_records(const GibbsMechanism& m, const Distribution& p,
                                          const NormPair& pair, double bound,
                                          std::span<const std::size_t> indices) {
  const bool linf = pair.output() == OutputNorm::kLInf;
  const bool tv_input = pair.input() == InputNorm::kTV;
  const TangentMapKernel kernel = linf ? log_output_tangent_map(m, p) : output_tangent_map(m, p);
  const Vector log_q = log_output(m, p);
  const Vector q = kernel.output().weights();

  std::vector<LooRecord> records;
  for (std::size_t k : indices) {
    const LeaveOneOut loo = leave_one_out(p, k);
    LooRecord rec;
    rec.k = k;
    rec.label = p.space().label(k);
    rec.tv_dist = tv_norm(loo.direction);
    if (!tv_input) rec.hm1_dist = hm1_norm(loo.direction, *pair.laplacian());

    const Vector log_change = log_output(m, loo.perturbed) - log_q;
    rec.sup_log_ratio = linf_norm(log_change);
    const Vector predicted = apply(kernel, loo.direction);
    if (linf) {
      rec.observed = rec.sup_log_ratio;
      rec.linear_pred = linf_norm(predicted);
      rec.remainder = linf_norm(log_change - predicted);
    } else {
      const Vector change = gibbs_output(m, loo.perturbed).weights() - q;
      rec.observed = change.lpNorm<1>();
      rec.linear_pred = predicted.lpNorm<1>();
      rec.remainder = (change - predicted).lpNorm<1>();
    }
    rec.bound_rhs = bound * (tv_input ? rec.tv_dist : *rec.hm1_dist);
    rec.slack = tv_input && linf ? kLooSlack : rec.remainder + kLooSlack;
    rec.ok = rec.observed <= rec.bound_rhs + rec.slack;
    records.push_back(std::move(rec));
  }
  return records;
}

inline Json loo_json(const std::vector<LooRecord>& records) {
  Json arr = Json::array();
  for (const LooRecord& r : records) {
    arr.push_back(Json{{"k", r.k},
                       {"label", r.label},
                       {"tv_dist", r.tv_dist},
                       {"hm1_dist", report::optional_number(r.hm1_dist)},
                       {"sup_log_ratio", r.sup_log_ratio},
                       {"observed", r.observed},
                       {"linear_pred", r.linear_pred},
                       {"remainder", r.remainder},
                       {"bound_rhs", r.bound_rhs},
                       {"slack", r.slack},
                       {"ok", r.ok}});
  }
  return arr;
}

inline AuditResult run_loo(const AuditConfig& config) {
  const auto session = detail::Session::open(config);
  const std::vector<std::size_t> indices = session.loo_indices();
  const NormPair pair = session.pair();
  const Certificate cert = certify(session.mechanism, session.inputs.data, pair);
  const auto records = loo_records(session.mechanism, session.inputs.data, pair, cert.bound, indices);
  bool all_ok = true;
  for (const auto& r : records) all_ok = all_ok && r.ok;

  AuditResult result;
  result.report = Json{{"meta", session.meta("loo")},
                       {"certificate", report::certificate_json(cert)},
                       {"loo", loo_json(records)}};
  result.exit_code = all_ok ? kExitOk : kExitCheckFailed;
  return result;
}

inline AuditResult run_estimate(const AuditConfig& config) {
  const auto session = detail::Session::open(config);
  const EstimateTarget target = config.estimate_target.value_or(
      config.wasserstein() ? EstimateTarget::kR_T3 : EstimateTarget::kR_T1);
  const GibbsMechanism& m = session.mechanism;
  const Distribution& p = session.inputs.data;

  EstimateReport est;
  double exact = 0.0;
  if (target == EstimateTarget::kR_T1) {
    est = estimate_R_T1(m, p, config.samples, config.seed);
    exact = theorem_R(m, p, Theorem::kT1);
  } else {
    if (!session.laplacian) throw Error(ErrorCode::kMissingLaplacian, "R_T3 estimation needs graph_path");
    est = estimate_R_T3(m, p, *session.laplacian, config.samples, config.seed);
    exact = theorem_R(m, p, Theorem::kT3, &*session.laplacian);
  }
  Json j = report::estimate_json(est, p.space());
  j["exact_r"] = exact;
  j["abs_gap"] = std::abs(est.estimate - exact);

  Json meta = session.meta("estimate");
  meta["samples"] = config.samples;
  AuditResult result;
  result.report = Json{{"meta", std::move(meta)}, {"estimate", std::move(j)}};
  return result;
}

inline AuditResult run_fdcheck(const AuditConfig& config) {
  const auto session = detail::Session::open(config);
  const std::vector<std::size_t> indices = session.loo_indices();
  const Distribution& p = session.inputs.data;

  Json directions = Json::array();
  bool all_passed = true;
  for (std::size_t k : indices) {
    const LeaveOneOut loo = leave_one_out(p, k);
    const FdReport fd = fd_validate(session.mechanism, p, loo.direction, config.fd_steps);
    all_passed = all_passed && fd.passed();
    Json entry{{"k", k}, {"label", p.space().label(k)}};
    entry.update(report::fd_report_json(fd));
    directions.push_back(std::move(entry));
  }
  Json steps = Json::array();
  for (double h : config.fd_steps) steps.push_back(h);

  AuditResult result;
  result.report = Json{{"meta", session.meta("fdcheck")},
                       {"fdcheck", Json{{"steps", std::move(steps)},
                                        {"min_slope", 1.8},
                                        {"passed", all_passed},
                                        {"directions", std::move(directions)}}}};
  result.exit_code = all_passed ? kExitOk : kExitCheckFailed;
  return result;
}

// Flat CSV tables (loo.csv, fdcheck.csv, estimate.csv) for external plotting.
inline void emit_csv(const Json& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create '" + dir.string() + "'");
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + (dir / name).string() + "'");
    out << body;
  };
  const auto num = [](const Json& v) { return v.is_null() ? std::string() : io::format_number(v.get<double>()); };

  if (report.contains("loo")) {
    std::string body = "k,label,tv_dist,hm1_dist,sup_log_ratio,observed,linear_pred,remainder,bound_rhs,ok\n";
    for (const auto& r : report["loo"]) {
      body += std::to_string(r["k"].get<std::size_t>()) + "," + r["label"].get<std::string>() + "," +
              num(r["tv_dist"]) + "," + num(r["hm1_dist"]) + "," + num(r["sup_log_ratio"]) + "," +
              num(r["observed"]) + "," + num(r["linear_pred"]) + "," + num(r["remainder"]) + "," +
              num(r["bound_rhs"]) + "," + (r["ok"].get<bool>() ? "1" : "0") + "\n";
    }
    write("loo.csv", body);
  }
  if (report.contains("fdcheck")) {
    std::string body = "k,h,output_error,log_error\n";
    for (const auto& d : report["fdcheck"]["directions"]) {
      for (const auto& s : d["steps"]) {
        body += std::to_string(d["k"].get<std::size_t>()) + "," + num(s["h"]) + "," + num(s["output_error"]) +
                "," + num(s["log_error"]) + "\n";
      }
    }
    write("fdcheck.csv", body);
  }
  if (report.contains("estimate")) {
    const Json& e = report["estimate"];
    std::string body = "label,per_x_value\n";
    for (std::size_t i = 0; i < e["x_labels"].size(); ++i) {
      body += e["x_labels"][i].get<std::string>() + "," + num(e["per_x_values"][i]) + "\n";
    }
    write("estimate.csv", body);
  }
}

}  // namespace tdp::audit

#endif  // TDP_AUDIT_HPP_
