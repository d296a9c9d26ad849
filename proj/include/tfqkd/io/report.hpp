// Copyright 2026 The tfqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "tfqkd/error.hpp"
#include "tfqkd/optimize.hpp"
#include "tfqkd/security_rate.hpp"
#include "tfqkd/yield_bounds.hpp"

namespace tfqkd::io {

// Sentinel for non-finite values in every output format.
inline constexpr const char* kInfinitySentinel = "INF";

inline std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? kInfinitySentinel : "-INF";
  if (std::isnan(x)) return "NAN";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

inline nlohmann::json error_record(ErrorCode code, const std::string& message) {
  return {{"error", {{"code", std::string(to_string(code))}, {"message", message}}}};
}

inline nlohmann::json to_json(const IntensitySettings& s) {
  return {{"alpha_a", s.alpha_a},
          {"alpha_b", s.alpha_b},
          {"mu", s.mu},
          {"nu", s.nu}};
}

inline nlohmann::json to_json(const YieldBounds<double>& b) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [idx, e] : b.entries()) {
    nlohmann::json row = {{"n", idx.n},
                          {"m", idx.m},
                          {"value", number(e.value)},
                          {"raw", number(e.raw)},
                          {"source", std::string(to_string(e.source))}};
    if (!e.detail.empty()) row["detail"] = e.detail;
    out.push_back(std::move(row));
  }
  return out;
}

inline nlohmann::json to_json(const KeyRateResult<double>& r) {
  return {{"rate", number(r.rate)},
          {"rate_omega_c", number(r.rate_omega_c)},
          {"rate_omega_d", number(r.rate_omega_d)},
          {"e_x", number(r.e_x)},
          {"e_x_defined", r.e_x_defined},
          {"e_z_upp", number(r.e_z_upp)},
          {"e_z_raw", number(r.e_z_raw)},
          {"p_x", number(r.p_x)},
          {"f", r.f},
          {"n_cut", r.n_cut},
          {"tail_bound", number(r.tail_bound)},
          {"bounds", to_json(r.bounds)}};
}

inline nlohmann::json to_json(const OptimizationResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"start", t.start},
                     {"end", t.end},
                     {"rate", number(t.rate)},
                     {"evaluations", t.evaluations}});
  return {{"rate", number(r.rate)},
          {"settings", to_json(r.settings)},
          {"detail", to_json(r.detail)},
          {"trace", std::move(trace)}};
}

inline nlohmann::json to_json(const FluctuationResult& r) {
  return {{"min_rate", number(r.min_rate)},
          {"center_rate", number(r.center_rate)},
          {"argmin", to_json(r.argmin)},
          {"evaluations", r.evaluations}};
}

}  // namespace tfqkd::io
