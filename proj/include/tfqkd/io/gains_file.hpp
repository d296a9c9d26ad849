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

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfqkd/core_model.hpp"
#include "tfqkd/error.hpp"

namespace tfqkd::io {

// Gains file layout:
//   {"schema_version": 1, "mu": [...], "nu": [...], "omega": "c" | "d",
//    "Q": [[Q^{0,0}, Q^{0,1}, ...], ...]}
// Row k of Q belongs to mu[k], column l to nu[l].
inline constexpr int kGainsSchemaVersion = 1;

inline nlohmann::json gains_to_json(const GainMatrix<double>& g) {
  nlohmann::json q = nlohmann::json::array();
  for (std::size_t k = 0; k < g.rows(); ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t l = 0; l < g.cols(); ++l) row.push_back(g(k, l));
    q.push_back(std::move(row));
  }
  return {{"schema_version", kGainsSchemaVersion},
          {"mu", g.mu()},
          {"nu", g.nu()},
          {"omega", g.event() == DetectorEvent::omega_c ? "c" : "d"},
          {"Q", std::move(q)}};
}

inline GainMatrix<double> gains_from_json(const nlohmann::json& j) {
  std::vector<double> mu, nu, q;
  DetectorEvent event = DetectorEvent::omega_c;
  try {
    require(j.is_object(), ErrorCode::schema_mismatch,
            "gains file must hold an object");
    for (const char* key : {"schema_version", "mu", "nu", "omega", "Q"})
      require(j.contains(key), ErrorCode::schema_mismatch,
              std::string("gains file lacks \"") + key + "\"");
    require(j.at("schema_version").is_number_integer() &&
                j.at("schema_version").get<int>() == kGainsSchemaVersion,
            ErrorCode::schema_mismatch, "unsupported gains schema_version");
    mu = j.at("mu").get<std::vector<double>>();
    nu = j.at("nu").get<std::vector<double>>();
    const auto omega = j.at("omega").get<std::string>();
    require(omega == "c" || omega == "d", ErrorCode::schema_mismatch,
            "omega must be \"c\" or \"d\"");
    event = omega == "c" ? DetectorEvent::omega_c : DetectorEvent::omega_d;
    const auto& rows = j.at("Q");
    require(rows.is_array() && rows.size() == mu.size(),
            ErrorCode::schema_mismatch, "Q must have one row per mu");
    for (const auto& row : rows) {
      require(row.is_array() && row.size() == nu.size(),
              ErrorCode::schema_mismatch, "each Q row must have one entry per nu");
      for (const auto& v : row) q.push_back(v.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::schema_mismatch, e.what());
  }
  for (double v : q)
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, ErrorCode::range_error,
            "gains must lie in [0,1]");
  tfqkd::detail::check_decoy_order(mu, "mu");
  tfqkd::detail::check_decoy_order(nu, "nu");
  return GainMatrix<double>(std::move(mu), std::move(nu), std::move(q), event,
                            GainProvenance::ingested);
}

inline GainMatrix<double> ingest_gains(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io_error,
          "cannot open gains file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::schema_mismatch, e.what());
  }
  return gains_from_json(j);
}

inline void emit_gains(const GainMatrix<double>& g, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::io_error,
          "cannot write gains file: " + path);
  out << gains_to_json(g).dump(2) << '\n';
}

}  // namespace tfqkd::io
