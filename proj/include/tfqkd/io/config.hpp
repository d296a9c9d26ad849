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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfqkd/core_model.hpp"
#include "tfqkd/error.hpp"
#include "tfqkd/numeric.hpp"
#include "tfqkd/optimize.hpp"
#include "tfqkd/security_rate.hpp"

namespace tfqkd::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Fixed operating point; when absent the free parameters are optimized.
struct PointSettings {
  double alpha_a = 0;
  double alpha_b = 0;
  std::vector<double> mu;
  std::vector<double> nu;

  IntensitySettings intensities() const { return {alpha_a, alpha_b, mu, nu}; }
};

struct SweepGrid {
  std::vector<double> loss_a_db;
  std::vector<double> loss_b_db;
};

struct ScenarioConfig {
  double loss_a_db = 0;
  double loss_b_db = 0;
  // Set when the transmittance was given directly.
  std::optional<double> eta_a, eta_b;
  double p_d = 1e-7;
  double theta_a = default_misalignment_angle();
  double theta_b = 0;
  double delta = 0.02;

  int decoys = 4;
  std::optional<std::vector<double>> weak;
  bool free_alpha = true;
  bool free_strong = true;
  double alpha_a = 0.2, alpha_b = 0.2;
  double strong_mu = 0.5, strong_nu = 0.5;
  std::optional<Interval> alpha_box;
  std::optional<Interval> strong_box;
  int starts = 16;
  bool symmetric = false;
  YieldMode mode = YieldMode::decoy;

  double f = 1.0;
  int n_cut = kDefaultNCut;
  std::uint64_t seed = 1;

  std::optional<FluctuationSpec> fluctuation;
  // "simulate" or a path to a gains file.
  std::string gains = "simulate";
  std::optional<PointSettings> settings;
  std::optional<SweepGrid> sweep;
  int threads = 1;

  ChannelParams channel() const;
  ChannelParams channel(double la_db, double lb_db) const;
  OptimizationSpec optimization_spec() const;
  void validate() const;
};

inline ChannelParams ScenarioConfig::channel(double la_db, double lb_db) const {
  ChannelParams p;
  p.eta_a = db_to_eta(la_db);
  p.eta_b = db_to_eta(lb_db);
  p.p_d = p_d;
  p.theta_a = theta_a;
  p.theta_b = theta_b;
  p.delta = delta;
  return p;
}

inline ChannelParams ScenarioConfig::channel() const {
  ChannelParams p = channel(loss_a_db, loss_b_db);
  if (eta_a) p.eta_a = *eta_a;
  if (eta_b) p.eta_b = *eta_b;
  return p;
}

inline OptimizationSpec ScenarioConfig::optimization_spec() const {
  OptimizationSpec s = decoys == 3 ? OptimizationSpec::three_decoy()
                                   : OptimizationSpec::four_decoy();
  if (weak) s.weak = *weak;
  if (alpha_box) s.alpha_box = *alpha_box;
  s.strong_box = strong_box;
  s.free_alpha = free_alpha;
  s.free_strong = free_strong;
  s.alpha_a = alpha_a;
  s.alpha_b = alpha_b;
  s.strong_mu = strong_mu;
  s.strong_nu = strong_nu;
  s.starts = starts;
  s.seed = seed;
  s.symmetric = symmetric;
  s.mode = mode;
  return s;
}

inline void ScenarioConfig::validate() const {
  require(std::isfinite(loss_a_db) && std::isfinite(loss_b_db) &&
              loss_a_db >= 0.0 && loss_b_db >= 0.0,
          ErrorCode::invalid_argument, "losses must be finite and >= 0 dB");
  channel().validate();
  require(decoys == 3 || decoys == 4, ErrorCode::invalid_argument,
          "decoys must be 3 or 4");
  require(f >= 0.0 && std::isfinite(f), ErrorCode::invalid_argument,
          "f must be finite and non-negative");
  require(n_cut >= 10, ErrorCode::invalid_argument, "n_cut must be >= 10");
  require(threads >= 1, ErrorCode::invalid_argument, "threads must be >= 1");
  optimization_spec().validate();
  if (fluctuation) fluctuation->validate();
  if (settings) {
    require(settings->mu.size() == static_cast<std::size_t>(decoys) &&
                settings->nu.size() == static_cast<std::size_t>(decoys),
            ErrorCode::invalid_argument,
            "settings intensity lists must match the decoy count");
    settings->intensities().validate();
  }
  if (gains != "simulate")
    require(std::filesystem::exists(gains), ErrorCode::io_error,
            "gains file not found: " + gains);
  if (sweep)
    for (const auto* axis : {&sweep->loss_a_db, &sweep->loss_b_db}) {
      require(!axis->empty(), ErrorCode::invalid_argument, "empty sweep axis");
      for (double v : *axis)
        require(std::isfinite(v) && v >= 0.0, ErrorCode::invalid_argument,
                "sweep losses must be finite and >= 0 dB");
    }
}

namespace detail {

inline Interval interval_from(const json& j, const char* name) {
  require(j.is_array() && j.size() == 2, ErrorCode::schema_mismatch,
          std::string(name) + " must be a [lo, hi] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline ScenarioConfig config_from_json(const json& j) {
  require(j.is_object(), ErrorCode::schema_mismatch, "config must be an object");
  require(j.contains("schema_version") &&
              j.at("schema_version").is_number_integer() &&
              j.at("schema_version").get<int>() == kSchemaVersion,
          ErrorCode::schema_mismatch, "unsupported or missing schema_version");
  static const char* const known[] = {
      "schema_version", "loss_a_db", "loss_b_db", "eta_a",     "eta_b",
      "noise",          "decoys",    "weak",      "free",      "alpha_box",
      "strong_box",     "starts",    "symmetric", "mode",      "f",
      "n_cut",          "seed",      "fluctuation", "gains",   "settings",
      "sweep",          "threads"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    require(ok, ErrorCode::schema_mismatch, "unknown config key: " + item.key());
  }
  ScenarioConfig c;
  try {
    detail::read_if(j, "loss_a_db", c.loss_a_db);
    detail::read_if(j, "loss_b_db", c.loss_b_db);
    if (j.contains("eta_a")) {
      c.eta_a = j.at("eta_a").get<double>();
      c.loss_a_db = eta_to_db(*c.eta_a);
    }
    if (j.contains("eta_b")) {
      c.eta_b = j.at("eta_b").get<double>();
      c.loss_b_db = eta_to_db(*c.eta_b);
    }
    if (j.contains("noise")) {
      const json& n = j.at("noise");
      detail::read_if(n, "p_d", c.p_d);
      detail::read_if(n, "theta_a", c.theta_a);
      detail::read_if(n, "theta_b", c.theta_b);
      detail::read_if(n, "delta", c.delta);
    }
    detail::read_if(j, "decoys", c.decoys);
    if (j.contains("weak")) c.weak = j.at("weak").get<std::vector<double>>();
    if (j.contains("free")) {
      const json& fr = j.at("free");
      detail::read_if(fr, "alpha", c.free_alpha);
      detail::read_if(fr, "strong", c.free_strong);
      detail::read_if(fr, "alpha_a", c.alpha_a);
      detail::read_if(fr, "alpha_b", c.alpha_b);
      detail::read_if(fr, "strong_mu", c.strong_mu);
      detail::read_if(fr, "strong_nu", c.strong_nu);
    }
    if (j.contains("alpha_box"))
      c.alpha_box = detail::interval_from(j.at("alpha_box"), "alpha_box");
    if (j.contains("strong_box"))
      c.strong_box = detail::interval_from(j.at("strong_box"), "strong_box");
    detail::read_if(j, "starts", c.starts);
    detail::read_if(j, "symmetric", c.symmetric);
    if (j.contains("mode")) {
      const auto m = j.at("mode").get<std::string>();
      require(m == "decoy" || m == "exact", ErrorCode::schema_mismatch,
              "mode must be \"decoy\" or \"exact\"");
      c.mode = m == "decoy" ? YieldMode::decoy : YieldMode::exact;
    }
    detail::read_if(j, "f", c.f);
    detail::read_if(j, "n_cut", c.n_cut);
    detail::read_if(j, "seed", c.seed);
    if (j.contains("fluctuation")) {
      const json& fl = j.at("fluctuation");
      FluctuationSpec fs;
      detail::read_if(fl, "r", fs.r);
      if (fl.contains("width")) {
        const auto w = fl.at("width").get<std::string>();
        require(w == "half" || w == "total", ErrorCode::schema_mismatch,
                "fluctuation width must be \"half\" or \"total\"");
        fs.half_width = w == "half";
      }
      detail::read_if(fl, "signals", fs.signals);
      detail::read_if(fl, "decoys", fs.decoys);
      detail::read_if(fl, "samples", fs.samples);
      detail::read_if(fl, "polish_evaluations", fs.polish_evaluations);
      detail::read_if(fl, "seed", fs.seed);
      detail::read_if(fl, "perturb_gains", fs.perturb_gains);
      c.fluctuation = fs;
    }
    detail::read_if(j, "gains", c.gains);
    if (j.contains("settings")) {
      const json& s = j.at("settings");
      PointSettings ps;
      ps.alpha_a = s.at("alpha_a").get<double>();
      ps.alpha_b = s.at("alpha_b").get<double>();
      ps.mu = s.at("mu").get<std::vector<double>>();
      ps.nu = s.at("nu").get<std::vector<double>>();
      c.settings = ps;
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      SweepGrid g;
      g.loss_a_db = s.at("loss_a_db").get<std::vector<double>>();
      g.loss_b_db = s.at("loss_b_db").get<std::vector<double>>();
      c.sweep = g;
    }
    detail::read_if(j, "threads", c.threads);
  } catch (const json::exception& e) {
    fail(ErrorCode::schema_mismatch, e.what());
  }
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io_error,
          "cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::schema_mismatch, e.what());
  }
  return config_from_json(j);
}

}  // namespace tfqkd::io
