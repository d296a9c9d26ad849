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

#include <algorithm>
#include <atomic>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tfqkd/io/config.hpp"
#include "tfqkd/io/report.hpp"
#include "tfqkd/optimize.hpp"
#include "tfqkd/security_rate.hpp"

namespace tfqkd::io {

struct SweepRow {
  double loss_a_db = 0;
  double loss_b_db = 0;
  double rate = 0;
  double alpha_a = 0;
  double alpha_b = 0;
  double strongest_mu = 0;
  double strongest_nu = 0;
  double arriving_a = 0;  // eta_a alpha_a^2
  double arriving_b = 0;
  double plob = 0;
  bool beats_plob = false;
  std::string error;  // empty on success
};

inline constexpr const char* kSweepHeader =
    "loss_a_db,loss_b_db,rate,alpha_a,alpha_b,strongest_mu,strongest_nu,"
    "arriving_a,arriving_b,plob,beats_plob,error";

inline double plob_or_infinity(double eta_a, double eta_b) {
  if (eta_a * eta_b >= 1.0) return std::numeric_limits<double>::infinity();
  return plob_bound(eta_a, eta_b);
}

// Optimized rate at one grid point; with a fluctuation spec the reported
// rate is the worst case around the optimized center.
inline SweepRow run_sweep_point(const ScenarioConfig& config, double la_db,
                                double lb_db) {
  SweepRow row;
  row.loss_a_db = la_db;
  row.loss_b_db = lb_db;
  try {
    const ChannelParams p = config.channel(la_db, lb_db);
    row.plob = plob_or_infinity(p.eta_a, p.eta_b);
    const auto opt =
        optimize_rate(p, config.optimization_spec(), config.f, config.n_cut);
    row.rate = opt.rate;
    if (config.fluctuation)
      row.rate = worst_case_fluctuation(p, opt.settings, *config.fluctuation,
                                        config.f, config.n_cut, config.mode)
                     .min_rate;
    row.alpha_a = opt.settings.alpha_a;
    row.alpha_b = opt.settings.alpha_b;
    row.strongest_mu = strongest(opt.settings.mu);
    row.strongest_nu = strongest(opt.settings.nu);
    row.arriving_a = p.eta_a * row.alpha_a * row.alpha_a;
    row.arriving_b = p.eta_b * row.alpha_b * row.alpha_b;
    row.beats_plob = std::isfinite(row.plob) && row.rate > row.plob;
  } catch (const Error& e) {
    row = SweepRow{};
    row.loss_a_db = la_db;
    row.loss_b_db = lb_db;
    row.error = e.what();
  }
  return row;
}

// Evaluates the grid loss_a x loss_b on `threads` workers. Rows come back
// sorted by (loss_a_db, loss_b_db) whatever the scheduling.
inline std::vector<SweepRow> run_sweep(const ScenarioConfig& config,
                                       const SweepGrid& grid, int threads) {
  require(threads >= 1, ErrorCode::invalid_argument, "threads must be >= 1");
  std::vector<std::pair<double, double>> points;
  for (double a : grid.loss_a_db)
    for (double b : grid.loss_b_db) points.emplace_back(a, b);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  std::vector<SweepRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++)
      rows[i] = run_sweep_point(config, points[i].first, points[i].second);
  };
  const auto n = std::min<std::size_t>(threads, std::max<std::size_t>(points.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << format_number(r.loss_a_db) << ',' << format_number(r.loss_b_db) << ',';
    if (r.error.empty()) {
      for (double v : {r.rate, r.alpha_a, r.alpha_b, r.strongest_mu,
                       r.strongest_nu, r.arriving_a, r.arriving_b, r.plob})
        out << format_number(v) << ',';
      out << (r.beats_plob ? "true" : "false") << ',';
    } else {
      out << ",,,,,,,,,";
    }
    out << csv_field(r.error) << '\n';
  }
}

inline nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"loss_a_db", r.loss_a_db}, {"loss_b_db", r.loss_b_db}};
    if (r.error.empty()) {
      j["rate"] = number(r.rate);
      j["alpha_a"] = r.alpha_a;
      j["alpha_b"] = r.alpha_b;
      j["strongest_mu"] = r.strongest_mu;
      j["strongest_nu"] = r.strongest_nu;
      j["arriving_a"] = r.arriving_a;
      j["arriving_b"] = r.arriving_b;
      j["plob"] = number(r.plob);
      j["beats_plob"] = r.beats_plob;
    } else {
      j["error"] = r.error;
    }
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace tfqkd::io
