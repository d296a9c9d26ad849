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

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tfqkd/io/config.hpp"
#include "tfqkd/io/gains_file.hpp"
#include "tfqkd/io/report.hpp"
#include "tfqkd/io/sweep.hpp"
#include "tfqkd/optimize.hpp"
#include "tfqkd/security_rate.hpp"
#include "tfqkd/verify/suite.hpp"

namespace {

using nlohmann::json;
using namespace tfqkd;

struct Options {
  std::string config;
  std::optional<double> loss_a_db, loss_b_db;
  std::optional<int> decoys;
  std::optional<double> f;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::string gains;
  std::optional<double> fluctuation;
  bool symmetric = false;
  std::optional<int> threads;
  std::optional<int> n_cut;
  std::string mode;
  std::optional<double> alpha_a, alpha_b;
  std::vector<double> mu, nu;
  std::vector<double> grid_a, grid_b;
  std::string emit_gains;
  int samples = 200;
  int lp_order = verify::kDefaultLpOrder;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "scenario config (JSON)");
  cmd->add_option("--loss-a-db", o.loss_a_db, "loss of Alice's channel in dB");
  cmd->add_option("--loss-b-db", o.loss_b_db, "loss of Bob's channel in dB");
  cmd->add_option("--decoys", o.decoys, "number of decoy intensities")
      ->check(CLI::IsMember({3, 4}));
  cmd->add_option("--f", o.f, "error-correction inefficiency");
  cmd->add_option("--seed", o.seed, "optimizer seed");
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--gains", o.gains, "gains file instead of simulated gains");
  cmd->add_option("--fluctuation", o.fluctuation,
                  "relative intensity fluctuation r (worst case)");
  cmd->add_flag("--symmetric-intensities", o.symmetric,
                "force equal intensity sets and amplitudes for both parties");
  cmd->add_option("--threads", o.threads, "worker threads for sweeps");
  cmd->add_option("--n-cut", o.n_cut, "phase-error series cutoff");
  cmd->add_option("--mode", o.mode, "decoy or exact yields")
      ->check(CLI::IsMember({"decoy", "exact"}));
  cmd->add_option("--alpha-a", o.alpha_a, "fixed signal amplitude of Alice");
  cmd->add_option("--alpha-b", o.alpha_b, "fixed signal amplitude of Bob");
  cmd->add_option("--mu", o.mu, "fixed intensities of Alice")->delimiter(',');
  cmd->add_option("--nu", o.nu, "fixed intensities of Bob")->delimiter(',');
}

io::ScenarioConfig build_config(const Options& o) {
  io::ScenarioConfig c;
  if (!o.config.empty()) c = io::load_config(o.config);
  if (o.loss_a_db) {
    c.loss_a_db = *o.loss_a_db;
    c.eta_a.reset();
  }
  if (o.loss_b_db) {
    c.loss_b_db = *o.loss_b_db;
    c.eta_b.reset();
  }
  if (o.decoys && *o.decoys != c.decoys) {
    c.decoys = *o.decoys;
    c.weak.reset();
  }
  if (o.f) c.f = *o.f;
  if (o.seed) c.seed = *o.seed;
  if (!o.gains.empty()) c.gains = o.gains;
  if (o.fluctuation) {
    FluctuationSpec fs = c.fluctuation.value_or(FluctuationSpec{});
    fs.r = *o.fluctuation;
    c.fluctuation = fs;
  }
  if (o.symmetric) c.symmetric = true;
  if (o.threads) c.threads = *o.threads;
  if (o.n_cut) c.n_cut = *o.n_cut;
  if (!o.mode.empty())
    c.mode = o.mode == "exact" ? YieldMode::exact : YieldMode::decoy;
  if (o.alpha_a || o.alpha_b || !o.mu.empty() || !o.nu.empty()) {
    io::PointSettings s = c.settings.value_or(io::PointSettings{});
    if (o.alpha_a) s.alpha_a = *o.alpha_a;
    if (o.alpha_b) s.alpha_b = *o.alpha_b;
    if (!o.mu.empty()) s.mu = o.mu;
    if (!o.nu.empty()) s.nu = o.nu;
    if (!o.decoys && !s.mu.empty() && static_cast<int>(s.mu.size()) != c.decoys) {
      c.decoys = static_cast<int>(s.mu.size());
      c.weak.reset();
    }
    c.settings = s;
  }
  if (!o.grid_a.empty() || !o.grid_b.empty()) {
    io::SweepGrid g = c.sweep.value_or(io::SweepGrid{});
    if (!o.grid_a.empty()) g.loss_a_db = o.grid_a;
    if (!o.grid_b.empty()) g.loss_b_db = o.grid_b;
    c.sweep = g;
  }
  return c;
}

// Settings intensities may be omitted when a gains file supplies them.
void validate_config(io::ScenarioConfig& c) {
  if (c.settings && c.gains != "simulate" && c.settings->mu.empty() &&
      c.settings->nu.empty()) {
    const auto g = io::ingest_gains(c.gains);
    c.settings->mu = g.mu();
    c.settings->nu = g.nu();
    c.decoys = static_cast<int>(g.rows());
    c.weak.reset();
  }
  c.validate();
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::io_error, "cannot write " + o.out);
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json scenario_json(const io::ScenarioConfig& c) {
  const ChannelParams p = c.channel();
  return {{"loss_a_db", c.loss_a_db},
          {"loss_b_db", c.loss_b_db},
          {"eta_a", p.eta_a},
          {"eta_b", p.eta_b},
          {"decoys", c.decoys},
          {"f", c.f},
          {"seed", c.seed}};
}

std::string rate_csv(const io::ScenarioConfig& c, const KeyRateResult<double>& r,
                     const IntensitySettings& s) {
  std::ostringstream out;
  out << "loss_a_db,loss_b_db,rate,alpha_a,alpha_b,e_x,e_z_upp,p_x\n"
      << io::format_number(c.loss_a_db) << ',' << io::format_number(c.loss_b_db)
      << ',' << io::format_number(r.rate) << ',' << io::format_number(s.alpha_a)
      << ',' << io::format_number(s.alpha_b) << ',' << io::format_number(r.e_x)
      << ',' << io::format_number(r.e_z_upp) << ',' << io::format_number(r.p_x)
      << '\n';
  return out.str();
}

GainMatrix<double> gains_for(const io::ScenarioConfig& c, const IntensitySettings& s) {
  if (c.gains != "simulate") return io::ingest_gains(c.gains);
  return simulate_gains<double>(c.channel(), s);
}

// Fixed settings or the optimum of the free parameters.
IntensitySettings operating_point(const io::ScenarioConfig& c,
                                  std::optional<OptimizationResult>& opt) {
  if (c.settings) return c.settings->intensities();
  opt = optimize_rate(c.channel(), c.optimization_spec(), c.f, c.n_cut);
  return opt->settings;
}

int run_rate(const Options& o) {
  auto c = build_config(o);
  validate_config(c);
  const ChannelParams p = c.channel();
  std::optional<OptimizationResult> opt;
  KeyRateResult<double> r;
  IntensitySettings s;
  if (c.gains != "simulate") {
    require(c.settings.has_value(), ErrorCode::invalid_argument,
            "a gains file needs --alpha-a and --alpha-b");
    s = c.settings->intensities();
    r = evaluate_key_rate<double>(p, s.alpha_a, s.alpha_b,
                                  yield_bounds(io::ingest_gains(c.gains)), c.f,
                                  c.n_cut);
  } else if (c.settings) {
    s = c.settings->intensities();
    r = RateObjective(p, c.mode, c.f, c.n_cut).evaluate(s);
  } else {
    s = operating_point(c, opt);
    r = opt->detail;
  }
  if (o.format == "csv") {
    emit(o, rate_csv(c, r, s));
    return 0;
  }
  json j = {{"command", "rate"},
            {"scenario", scenario_json(c)},
            {"optimized", opt.has_value()},
            {"settings", io::to_json(s)},
            {"result", io::to_json(r)}};
  emit(o, dump(j));
  return 0;
}

int run_optimize(const Options& o) {
  auto c = build_config(o);
  validate_config(c);
  const auto res = optimize_rate(c.channel(), c.optimization_spec(), c.f, c.n_cut);
  if (o.format == "csv") {
    emit(o, rate_csv(c, res.detail, res.settings));
    return 0;
  }
  json j = {{"command", "optimize"},
            {"scenario", scenario_json(c)},
            {"result", io::to_json(res)}};
  emit(o, dump(j));
  return 0;
}

int run_fluctuation(const Options& o) {
  auto c = build_config(o);
  validate_config(c);
  require(c.fluctuation.has_value(), ErrorCode::invalid_argument,
          "fluctuation needs --fluctuation <r> or a config section");
  std::optional<OptimizationResult> opt;
  const auto center = operating_point(c, opt);
  const auto w = worst_case_fluctuation(c.channel(), center, *c.fluctuation,
                                        c.f, c.n_cut, c.mode);
  json j = {{"command", "fluctuation"},
            {"scenario", scenario_json(c)},
            {"r", c.fluctuation->r},
            {"width", c.fluctuation->half_width ? "half" : "total"},
            {"center", io::to_json(center)},
            {"result", io::to_json(w)}};
  emit(o, dump(j));
  return 0;
}

int run_bounds(const Options& o) {
  auto c = build_config(o);
  validate_config(c);
  std::optional<OptimizationResult> opt;
  IntensitySettings s;
  if (c.gains == "simulate") s = operating_point(c, opt);
  const auto g = gains_for(c, s);
  if (!o.emit_gains.empty()) io::emit_gains(g, o.emit_gains);
  const auto b = yield_bounds(g);
  json j = {{"command", "bounds"},
            {"gains", io::gains_to_json(g)},
            {"source", c.gains},
            {"bounds", io::to_json(b)}};
  emit(o, dump(j));
  return 0;
}

int run_sweep(const Options& o) {
  auto c = build_config(o);
  validate_config(c);
  require(c.sweep.has_value(), ErrorCode::invalid_argument,
          "sweep needs --grid-a/--grid-b or a config section");
  const auto rows = io::run_sweep(c, *c.sweep, c.threads);
  if (o.format == "json") {
    emit(o, dump(io::sweep_to_json(rows)));
  } else {
    std::ostringstream out;
    io::write_sweep_csv(out, rows);
    emit(o, out.str());
  }
  return 0;
}

int run_plob(const Options& o) {
  auto c = build_config(o);
  const ChannelParams p = c.channel();
  p.validate();
  const double v = io::plob_or_infinity(p.eta_a, p.eta_b);
  if (o.format == "csv") {
    emit(o, "loss_a_db,loss_b_db,plob\n" + io::format_number(c.loss_a_db) + "," +
                io::format_number(c.loss_b_db) + "," + io::format_number(v) + "\n");
    return 0;
  }
  emit(o, dump({{"command", "plob"},
                {"loss_a_db", c.loss_a_db},
                {"loss_b_db", c.loss_b_db},
                {"plob", io::number(v)}}));
  return 0;
}

json summary_json(const verify::CheckSummary& s, double tolerance) {
  return {{"cases", s.cases},
          {"comparisons", s.comparisons},
          {"violations", s.violations},
          {"worst_margin", io::number(s.worst_margin)},
          {"tolerance", tolerance},
          {"first_failure", s.first_failure},
          {"passed", s.passed()}};
}

int run_verify(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(1);
  const auto sound = verify::check_bound_soundness(o.samples, seed);
  const auto chain = verify::check_lp_chain(std::min(o.samples, 50), seed, o.lp_order);
  const auto oracle = verify::check_oracles(20, seed);
  const bool ok = sound.passed() && chain.passed() && oracle.passed(1e-10);
  json j = {{"command", "verify"},
            {"seed", seed},
            {"soundness", summary_json(sound, 1e-12)},
            {"lp_chain", summary_json(chain, 1e-9)},
            {"lp_order", o.lp_order},
            {"oracles",
             {{"draws", oracle.draws},
              {"worst_fock_difference", oracle.worst_fock},
              {"worst_series_excess", oracle.worst_series},
              {"passed", oracle.passed(1e-10)}}},
            {"passed", ok}};
  emit(o, dump(j));
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twin-field decoy-state key rate simulator"};
  app.require_subcommand(1);
  Options o;
  auto* rate = app.add_subcommand("rate", "key rate at one operating point");
  auto* sweep = app.add_subcommand("sweep", "optimized rate over a loss grid");
  auto* optimize = app.add_subcommand("optimize", "optimize the free intensities");
  auto* fluct = app.add_subcommand("fluctuation", "worst case under intensity fluctuations");
  auto* bounds = app.add_subcommand("bounds", "yield bounds from simulated or measured gains");
  auto* verify_cmd = app.add_subcommand("verify", "run the oracle dominance suite");
  auto* plob = app.add_subcommand("plob", "repeaterless benchmark");
  for (auto* cmd : {rate, sweep, optimize, fluct, bounds, plob}) add_common(cmd, o);
  sweep->add_option("--grid-a", o.grid_a, "losses of Alice in dB")->delimiter(',');
  sweep->add_option("--grid-b", o.grid_b, "losses of Bob in dB")->delimiter(',');
  bounds->add_option("--emit-gains", o.emit_gains, "write the gains file used");
  verify_cmd->add_option("--seed", o.seed, "seed of the random configurations");
  verify_cmd->add_option("--samples", o.samples, "random configurations")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--lp-order", o.lp_order, "LP truncation order")
      ->check(CLI::Range(6, 40));
  verify_cmd->add_option("--out", o.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (*rate) return run_rate(o);
    if (*sweep) return run_sweep(o);
    if (*optimize) return run_optimize(o);
    if (*fluct) return run_fluctuation(o);
    if (*bounds) return run_bounds(o);
    if (*verify_cmd) return run_verify(o);
    if (*plob) return run_plob(o);
  } catch (const tfqkd::Error& e) {
    std::cerr << io::error_record(e.code(), e.what()).dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump()
              << '\n';
    return 1;
  }
  return 1;
}
