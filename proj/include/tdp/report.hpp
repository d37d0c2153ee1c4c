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

// JSON report serialization. Floating-point values are written with 17
// significant digits and object keys keep insertion order, so identical
// inputs produce byte-identical reports.

#ifndef TDP_REPORT_HPP_
#define TDP_REPORT_HPP_

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "json.hpp"
#include "tdp/certification.hpp"
#include "tdp/error.hpp"
#include "tdp/estimators.hpp"
#include "tdp/spaces.hpp"
#include "tdp/tangent_maps.hpp"

namespace tdp::report {

using Json = nlohmann::ordered_json;

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

namespace detail {

inline void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

inline void write_value(std::string& out, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        out += Json(key).dump();
        out += ": ";
        write_value(out, value, indent, depth + 1);
      }
      newline(depth);
      out.push_back('}');
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out.push_back('[');
      bool first = true;
      for (const auto& value : j) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        write_value(out, value, indent, depth + 1);
      }
      newline(depth);
      out.push_back(']');
      return;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace detail

inline std::string to_string(const Json& j, int indent = 2) {
  std::string out;
  detail::write_value(out, j, indent, 0);
  out.push_back('\n');
  return out;
}

inline Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Json labels_json(const FiniteSpace& space) {
  Json arr = Json::array();
  for (const auto& l : space.labels()) arr.push_back(l);
  return arr;
}

// Exact values serialize as numbers, enclosures as {"lower", "upper"}.
inline Json norm_value_json(const NormValue& v) {
  if (v.exact()) return Json(v.lower);
  return Json{{"lower", v.lower}, {"upper", v.upper}};
}

inline Json certificate_json(const Certificate& c) {
  return Json{{"theorem", std::string(theorem_name(c.theorem))},
              {"norm_pair", c.norm_pair},
              {"beta", c.beta},
              {"r", c.R},
              {"bound", c.bound},
              {"exact_ambient", norm_value_json(c.exact_ambient)},
              {"exact_tangent", norm_value_json(c.exact_tangent)},
              {"status", std::string(status_name(c.status))},
              {"satisfied", c.satisfied()}};
}

inline Json estimate_json(const EstimateReport& r, const FiniteSpace& data_space) {
  Json j{{"target", std::string(target_name(r.target))},
         {"estimate", r.estimate},
         {"sample_count", r.sample_count},
         {"seed", r.seed},
         {"x_labels", labels_json(data_space)},
         {"per_x_values", vector_json(r.per_x_values)}};
  if (r.target == EstimateTarget::kR_T3) j["per_edge_values"] = vector_json(r.per_edge_values);
  return j;
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json fd_report_json(const FdReport& r) {
  Json steps = Json::array();
  for (const FdStep& s : r.steps) {
    steps.push_back(Json{{"h", s.h}, {"output_error", s.output_error}, {"log_error", s.log_error}});
  }
  return Json{{"steps", std::move(steps)},
              {"output_slope", optional_number(r.output_slope)},
              {"log_slope", optional_number(r.log_slope)},
              {"passed", r.passed()}};
}

}  // namespace tdp::report

#endif  // TDP_REPORT_HPP_
