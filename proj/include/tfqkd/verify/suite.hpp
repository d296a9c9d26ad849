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
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tfqkd/core_model.hpp"
#include "tfqkd/decoy_bounds3.hpp"
#include "tfqkd/decoy_bounds4.hpp"
#include "tfqkd/verify/fock.hpp"
#include "tfqkd/verify/lp.hpp"
#include "tfqkd/verify/series.hpp"

namespace tfqkd::verify {

struct RandomConfiguration {
  ChannelParams params;
  IntensitySettings settings;
};

struct IntensityRange {
  double strongest_lo = 0.05;
  double strongest_hi = 1.0;
  double ratio_lo = 2.0;  // between neighbouring decoys
  double ratio_hi = 100.0;
};

// Decreasing list: strongest drawn log-uniformly in the range, each weaker
// decoy a factor ratio_lo..ratio_hi below the previous one. Four-decoy lists are
// returned in the weak..., strongest order.
inline std::vector<double> random_decoys(std::mt19937_64& rng, int decoys,
                                         const IntensityRange& range) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) {
    return lo * std::pow(hi / lo, unit(rng));
  };
  std::vector<double> v{log_uniform(range.strongest_lo, range.strongest_hi)};
  for (int i = 1; i < decoys; ++i) v.push_back(v.back() / log_uniform(range.ratio_lo, range.ratio_hi));
  if (decoys == 4) std::rotate(v.begin(), v.begin() + 1, v.end());
  return v;
}

// Losses uniform in [0, 50] dB per arm with the default noise profile.
inline RandomConfiguration random_configuration(std::mt19937_64& rng, int decoys,
                                                const IntensityRange& range = {}) {
  std::uniform_real_distribution<double> loss(0.0, 50.0);
  std::uniform_real_distribution<double> amp(0.01, 1.0);
  RandomConfiguration c;
  const double la = loss(rng), lb = loss(rng);
  c.params = table1_channel(la, lb);
  c.settings.alpha_a = amp(rng);
  c.settings.alpha_b = amp(rng);
  c.settings.mu = random_decoys(rng, decoys, range);
  c.settings.nu = random_decoys(rng, decoys, range);
  return c;
}

struct CheckSummary {
  int cases = 0;
  int comparisons = 0;
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string first_failure;

  bool passed() const { return violations == 0 && cases > 0; }

  void record(double margin, double tolerance, const std::string& what) {
    ++comparisons;
    worst_margin = std::min(worst_margin, margin);
    if (margin < -tolerance) {
      if (violations == 0) first_failure = what;
      ++violations;
    }
  }
};

inline std::string describe(const RandomConfiguration& c, YieldIndex idx) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "Y%d%d at %.3f/%.3f dB, mu0=%.4g nu0=%.4g",
                idx.n, idx.m, eta_to_db(c.params.eta_a),
                eta_to_db(c.params.eta_b), c.settings.mu[0], c.settings.nu[0]);
  return buf;
}

// Every analytical bound against the dark-count free yield.
inline CheckSummary check_bound_soundness(int configurations, std::uint64_t seed,
                                          double tolerance = 1e-12) {
  std::mt19937_64 rng(seed);
  CheckSummary s;
  for (int i = 0; i < configurations; ++i) {
    const int decoys = i % 2 == 0 ? 3 : 4;
    const auto c = random_configuration(rng, decoys);
    const auto bounds = yield_bounds(simulate_gains<double>(c.params, c.settings));
    ++s.cases;
    for (YieldIndex idx : kBoundedYields)
      s.record(bounds(idx.n, idx.m) - theoretical_yield(c.params, idx.n, idx.m),
               tolerance, describe(c, idx));
  }
  return s;
}

// Intensity scale at which the N_t = 10 truncation keeps the chain within
// 1e-9. Stronger decoys need a higher order: the omitted Poisson mass is
// amplified by the conditioning of the four-decoy combinations.
inline constexpr IntensityRange kLpChainRange{0.02, 0.1, 2.0, 10.0};

// true yield <= LP optimum <= four-decoy bound <= three-decoy bound, where
// the three-decoy bound uses the strongest and the two weakest decoys.
inline CheckSummary check_lp_chain(int configurations, std::uint64_t seed,
                                   int n_t = kDefaultLpOrder,
                                   double tolerance = 1e-9,
                                   const IntensityRange& range = kLpChainRange) {
  std::mt19937_64 rng(seed);
  CheckSummary s;
  for (int i = 0; i < configurations; ++i) {
    const auto c = random_configuration(rng, 4, range);
    const auto g4 = simulate_gains<double>(c.params, c.settings);
    const auto b4 = yield_bounds(g4);
    const std::vector<double> mu3{c.settings.mu[3], c.settings.mu[1], c.settings.mu[2]};
    const std::vector<double> nu3{c.settings.nu[3], c.settings.nu[1], c.settings.nu[2]};
    const auto b3 = yield_bounds(simulate_gains<double>(c.params, mu3, nu3));
    ++s.cases;
    for (YieldIndex idx : kBoundedYields) {
      const double truth = with_dark_counts(
          c.params, theoretical_yield(c.params, idx.n, idx.m), idx.n, idx.m);
      const double lp = lp_yield_bound(g4, idx, n_t);
      const std::string where = describe(c, idx);
      s.record(lp - truth, tolerance, where + ": LP below true yield");
      s.record(b4(idx.n, idx.m) - lp, tolerance, where + ": four-decoy below LP");
      s.record(b3(idx.n, idx.m) - b4(idx.n, idx.m), tolerance,
               where + ": three-decoy below four-decoy");
    }
  }
  return s;
}

struct OracleSummary {
  int draws = 0;
  double worst_fock = 0;    // max |fock - theoretical|
  double worst_series = 0;  // max |series - gain| - tail bound
  bool passed(double fock_tolerance) const {
    return draws > 0 && worst_fock <= fock_tolerance && worst_series <= 0.0;
  }
};

// fock_yield against theoretical_yield on n + m <= max_photons, and the
// series gain against the closed form within the Poisson tail.
inline OracleSummary check_oracles(int draws, std::uint64_t seed,
                                   int max_photons = 8, int series_order = 40) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  OracleSummary s;
  for (int d = 0; d < draws; ++d) {
    ChannelParams p;
    p.eta_a = unit(rng);
    p.eta_b = unit(rng);
    p.p_d = 1e-7 * unit(rng);
    p.theta_a = std::numbers::pi * unit(rng);
    p.theta_b = std::numbers::pi * unit(rng);
    p.delta = 0.1 * unit(rng);
    ++s.draws;
    for (int n = 0; n <= max_photons; ++n)
      for (int m = 0; n + m <= max_photons; ++m)
        s.worst_fock = std::max(
            s.worst_fock, std::abs(fock_yield(p, n, m) - theoretical_yield(p, n, m)));
    const double mu = unit(rng), nu = unit(rng);
    const double gap = std::abs(series_gain(p, mu, nu, series_order) - gain(p, mu, nu));
    s.worst_series = std::max(
        s.worst_series, gap - poisson_tail_bound(mu, nu, series_order) - 1e-15);
  }
  return s;
}

}  // namespace tfqkd::verify
