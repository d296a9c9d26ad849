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


#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "tfqkd/core_model.hpp"
#include "tfqkd/decoy_bounds4.hpp"
#include "tfqkd/security_rate.hpp"
#include "tfqkd/verify/series.hpp"

namespace tfqkd {
namespace {

TEST(Entropy, KnownValues) {
  EXPECT_EQ(binary_entropy(0.5), 1.0);
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.11), 0.49992, 1e-5);
  EXPECT_THROW(binary_entropy(1.5), Error);
}

TEST(Entropy, EnvelopeIsMonotone) {
  double prev = 0;
  for (double x = 0; x <= 1.0; x += 0.01) {
    const double h = entropy_envelope(x);
    EXPECT_GE(h, prev);
    prev = h;
  }
  EXPECT_EQ(entropy_envelope(0.7), 1.0);
}

TEST(Plob, KnownValues) {
  EXPECT_DOUBLE_EQ(plob_bound(1.0, 0.5), 1.0);
  EXPECT_EQ(plob_bound(0.0, 0.3), 0.0);
  EXPECT_NEAR(plob_bound(0.1, 0.1), 0.014500, 1e-6);
  EXPECT_THROW(plob_bound(1.0, 1.0), Error);
}

// Brute-force sum of the phase-error expression over n, m <= n_max.
double brute_weighted(const YieldBounds<double>& b, double aa, double ab, int n_max) {
  auto coef = [](double a, int n) {
    return std::exp(-a * a / 2 + n * std::log(a) - 0.5 * std::lgamma(n + 1.0));
  };
  double sum[2] = {0, 0};
  for (int n = 0; n <= n_max; ++n)
    for (int m = 0; m <= n_max; ++m) {
      if (n % 2 != m % 2) continue;
      const double ca = aa == 0 ? (n == 0) : coef(aa, n);
      const double cb = ab == 0 ? (m == 0) : coef(ab, m);
      sum[n % 2] += ca * cb * std::sqrt(b(n, m));
    }
  return sum[0] * sum[0] + sum[1] * sum[1];
}

TEST(PhaseError, VacuumAmplitudes) {
  const YieldBounds<double> ones;
  const auto r = phase_error_upper(ones, 0.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(r.weighted, 1.0);
}

TEST(PhaseError, AllUnitYieldsMatchParitySums) {
  const YieldBounds<double> ones;
  for (double a : {0.1, 0.4, 0.9, 1.3}) {
    const auto r = phase_error_upper(ones, a, 0.7 * a, 1.0);
    EXPECT_NEAR(r.weighted, brute_weighted(ones, a, 0.7 * a, 80), 1e-12) << a;
  }
}

TEST(PhaseError, StoredBoundsMatchBruteForce) {
  const auto p = table1_channel(12, 18);
  const IntensitySettings s{0.4, 0.3, {1e-3, 1e-4, 1e-5, 0.4}, {1e-3, 1e-4, 1e-5, 0.3}};
  const auto b = yield_bounds(simulate_gains<double>(p, s));
  const auto xs = x_basis_statistics(p, s.alpha_a, s.alpha_b);
  const auto r = phase_error_upper(b, s.alpha_a, s.alpha_b, xs.p_x);
  EXPECT_NEAR(r.weighted, brute_weighted(b, s.alpha_a, s.alpha_b, 80), 1e-13);
  EXPECT_NEAR(r.e_z_raw * xs.p_x, r.weighted, 1e-15);
}

TEST(PhaseError, ZeroBoundsGiveNoPhaseError) {
  YieldBounds<double> zero;
  for (int n = 0; n <= 60; ++n)
    for (int m = 0; m <= 60; ++m) zero.set({n, m}, 0.0, BoundSource::external);
  const auto r = phase_error_upper(zero, 0.3, 0.3, 0.01);
  EXPECT_LT(r.e_z, 1e-12);
}

TEST(PhaseError, TruncationIsStable) {
  const auto p = table1_channel(25, 25);
  const IntensitySettings s{0.2, 0.2, {1e-3, 1e-4, 1e-5, 0.5}, {1e-3, 1e-4, 1e-5, 0.5}};
  const auto b = yield_bounds(simulate_gains<double>(p, s));
  const double px = x_basis_statistics(p, 0.2, 0.2).p_x;
  const auto r40 = phase_error_upper(b, 0.2, 0.2, px, 40, false);
  const auto r80 = phase_error_upper(b, 0.2, 0.2, px, 80, false);
  EXPECT_LT(std::abs(r40.e_z - r80.e_z), 1e-10);
  EXPECT_LT(r40.tail, 1e-10);
}

TEST(PhaseError, RejectsZeroDetection) {
  const YieldBounds<double> ones;
  try {
    phase_error_upper(ones, 0.1, 0.1, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::undefined_statistic);
  }
}

TEST(KeyRate, PositiveAtLowLoss) {
  const auto p = table1_channel(5, 5);
  const IntensitySettings s{0.3, 0.3, {1e-3, 1e-4, 1e-5, 0.4}, {1e-3, 1e-4, 1e-5, 0.4}};
  const auto r = key_rate(p, s);
  EXPECT_GT(r.rate, 0.0);
  EXPECT_EQ(r.rate, 2 * r.rate_omega_c);
  EXPECT_LE(r.e_z_upp, 1.0);
  EXPECT_EQ(r.bounds.size(), 9u);
}

TEST(KeyRate, ZeroAtExtremeLoss) {
  const auto p = table1_channel(200, 200);
  const IntensitySettings s{0.3, 0.3, {1e-3, 1e-4, 1e-5, 0.4}, {1e-3, 1e-4, 1e-5, 0.4}};
  const auto r = key_rate(p, s);
  EXPECT_EQ(r.rate, 0.0);
  EXPECT_LT(r.rate_omega_c, 0.0);
}

TEST(KeyRate, ExactYieldsBeatDecoyBounds) {
  const auto p = table1_channel(15, 15);
  const IntensitySettings s{0.25, 0.25, {1e-3, 1e-4, 1e-5, 0.4}, {1e-3, 1e-4, 1e-5, 0.4}};
  const auto decoy = key_rate(p, s);
  const auto exact = evaluate_key_rate(p, s.alpha_a, s.alpha_b, verify::exact_yields(p));
  EXPECT_GE(exact.rate, decoy.rate);
  EXPECT_LE(exact.e_z_upp, decoy.e_z_upp);
}

TEST(KeyRate, DecreasesWithLoss) {
  const IntensitySettings s{0.2, 0.2, {1e-3, 1e-4, 1e-5, 0.4}, {1e-3, 1e-4, 1e-5, 0.4}};
  double prev = 1;
  for (double db = 0; db <= 30; db += 5) {
    const double r = key_rate(table1_channel(db, db), s).rate;
    EXPECT_LT(r, prev) << db;
    prev = r;
  }
}

TEST(KeyRate, ReconciliationCostIsLinear) {
  const auto p = table1_channel(10, 10);
  const IntensitySettings s{0.3, 0.3, {0.3, 1e-4, 1e-5}, {0.3, 1e-4, 1e-5}};
  const auto r1 = key_rate(p, s, 1.0), r0 = key_rate(p, s, 0.0);
  EXPECT_NEAR(r0.rate_omega_c - r1.rate_omega_c,
              r1.p_x * binary_entropy(r1.e_x), 1e-16);
}

TEST(KeyRate, UndefinedErrorRateGivesZero) {
  auto p = table1_channel(10, 10);
  p.p_d = 0;
  const auto r = evaluate_key_rate(p, 0.0, 0.0, YieldBounds<double>{});
  EXPECT_FALSE(r.e_x_defined);
  EXPECT_EQ(r.rate, 0.0);
  // Dark counts alone make e_x = 1/2.
  const auto d = evaluate_key_rate(table1_channel(10, 10), 0.0, 0.0, YieldBounds<double>{});
  EXPECT_TRUE(d.e_x_defined);
  EXPECT_DOUBLE_EQ(d.e_x, 0.5);
}

}  // namespace
}  // namespace tfqkd
