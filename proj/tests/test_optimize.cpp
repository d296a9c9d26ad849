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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "tfqkd/optimize.hpp"

namespace tfqkd {
namespace {

TEST(NelderMead, FindsBoxedMinimum) {
  auto f = [](const std::vector<double>& x) {
    return (x[0] - 0.3) * (x[0] - 0.3) + 10 * (x[1] + 0.2) * (x[1] + 0.2);
  };
  const auto r = nelder_mead(f, {0.9, 0.9}, {-1, -1}, {1, 1});
  EXPECT_NEAR(r.x[0], 0.3, 1e-4);
  EXPECT_NEAR(r.x[1], -0.2, 1e-4);
  // Minimum outside the box lands on its face.
  const auto c = nelder_mead(f, {0.9, 0.9}, {0.5, 0.0}, {1, 1});
  EXPECT_NEAR(c.x[0], 0.5, 1e-4);
  EXPECT_NEAR(c.x[1], 0.0, 1e-4);
}

TEST(Spec, Defaults) {
  const auto four = OptimizationSpec::four_decoy();
  EXPECT_EQ(four.weak, (std::vector<double>{1e-3, 1e-4, 1e-5}));
  EXPECT_EQ(four.starts, 16);
  const auto three = OptimizationSpec::three_decoy();
  EXPECT_EQ(three.weak, (std::vector<double>{1e-4, 1e-5}));
  EXPECT_DOUBLE_EQ(three.strong_interval().lo, 1e-3);
  EXPECT_DOUBLE_EQ(three.strong_interval().hi, 1.0);
  const auto s = make_settings(four, 0.1, 0.2, 0.5, 0.6);
  EXPECT_EQ(s.mu, (std::vector<double>{1e-3, 1e-4, 1e-5, 0.5}));
  EXPECT_EQ(strongest(s.nu), 0.6);
  EXPECT_NO_THROW(s.validate());
}

TEST(Spec, EmptyBoxIsInfeasible) {
  auto spec = OptimizationSpec::four_decoy();
  spec.strong_box = Interval{1e-4, 0.5};  // reaches below the weak decoys
  try {
    optimize_rate(table1_channel(10, 10), spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::infeasible);
  }
  spec.strong_box.reset();
  spec.alpha_box = {0.5, 0.1};
  EXPECT_THROW(optimize_rate(table1_channel(10, 10), spec), Error);
  spec = OptimizationSpec::four_decoy();
  spec.weak = {1e-4, 1e-3, 1e-5};
  EXPECT_THROW(spec.validate(), Error);
}

TEST(Optimize, SymmetricChannelGivesSymmetricOptimum) {
  const auto r = optimize_rate(table1_channel(30, 30), OptimizationSpec::four_decoy());
  ASSERT_GT(r.rate, 0.0);
  EXPECT_NEAR(r.settings.alpha_a / r.settings.alpha_b, 1.0, 1e-3);
  EXPECT_NEAR(strongest(r.settings.mu) / strongest(r.settings.nu), 1.0, 1e-3);
  EXPECT_EQ(r.trace.size(), 16u);
  for (const auto& t : r.trace) EXPECT_LE(t.rate, r.rate);
  EXPECT_GT(strongest(r.settings.mu), 1e-3);
}

TEST(Optimize, LossierArmSendsMoreLight) {
  const auto r = optimize_rate(table1_channel(30, 20), OptimizationSpec::four_decoy());
  ASSERT_GT(r.rate, 0.0);
  EXPECT_GT(r.settings.alpha_a * r.settings.alpha_a,
            r.settings.alpha_b * r.settings.alpha_b);
}

TEST(Optimize, Deterministic) {
  const auto p = table1_channel(18, 25);
  const auto spec = OptimizationSpec::three_decoy();
  const auto a = optimize_rate(p, spec), b = optimize_rate(p, spec);
  EXPECT_EQ(a.rate, b.rate);
  EXPECT_EQ(a.settings.alpha_a, b.settings.alpha_a);
  EXPECT_EQ(a.settings.mu, b.settings.mu);
}

TEST(Optimize, SymmetricConstraintNeverHelps) {
  const auto p = table1_channel(10, 30);
  auto spec = OptimizationSpec::four_decoy();
  const double free = optimize_rate(p, spec).rate;
  spec.symmetric = true;
  const auto constrained = optimize_rate(p, spec);
  EXPECT_EQ(constrained.settings.alpha_a, constrained.settings.alpha_b);
  EXPECT_EQ(constrained.settings.mu, constrained.settings.nu);
  EXPECT_GT(free, constrained.rate);
}

TEST(Optimize, ZeroAtExtremeLoss) {
  EXPECT_EQ(optimize_rate(table1_channel(200, 200), OptimizationSpec::four_decoy()).rate, 0.0);
}

TEST(Optimize, FixedParametersAreRespected) {
  auto spec = OptimizationSpec::three_decoy();
  spec.free_strong = false;
  spec.strong_mu = 0.4;
  spec.strong_nu = 0.3;
  const auto r = optimize_rate(table1_channel(12, 12), spec);
  EXPECT_EQ(r.settings.mu[0], 0.4);
  EXPECT_EQ(r.settings.nu[0], 0.3);
}

TEST(CoordinateDescent, StallsWhereMultistartDoesNot) {
  const auto p = table1_channel(20, 0);
  OptimizationSpec spec;
  spec.mode = YieldMode::exact;
  spec.free_strong = false;
  const auto m = optimize_rate(p, spec);
  const auto c = coordinate_descent(p, spec, {1e-3, 1e-3});
  EXPECT_GT(m.rate, 7e-4);
  EXPECT_LT(c.rate, m.rate);
}

TEST(Fluctuation, ZeroMagnitudeIsTheCenter) {
  const auto p = table1_channel(15, 15);
  const IntensitySettings c{0.2, 0.2, {1e-3, 1e-4, 1e-5, 0.4}, {1e-3, 1e-4, 1e-5, 0.4}};
  FluctuationSpec f;
  f.r = 0;
  const auto r = worst_case_fluctuation(p, c, f);
  EXPECT_EQ(r.min_rate, r.center_rate);
  EXPECT_EQ(r.center_rate, key_rate(p, c).rate);
}

TEST(Fluctuation, WorstCaseFallsWithMagnitude) {
  const auto p = table1_channel(15, 15);
  const IntensitySettings c{0.2, 0.2, {1e-1, 1e-2, 1e-3, 0.6}, {1e-1, 1e-2, 1e-3, 0.6}};
  double prev = std::numeric_limits<double>::infinity();
  for (double r : {0.0, 0.1, 0.2, 0.4}) {
    FluctuationSpec f;
    f.r = r;
    const double v = worst_case_fluctuation(p, c, f).min_rate;
    EXPECT_LE(v, prev) << r;
    prev = v;
  }
  EXPECT_LT(prev, key_rate(p, c).rate);
}

TEST(Fluctuation, WidthReadings) {
  FluctuationSpec f;
  f.r = 0.4;
  EXPECT_DOUBLE_EQ(f.half(), 0.4);
  f.half_width = false;
  EXPECT_DOUBLE_EQ(f.half(), 0.2);
  f.r = 0.95;
  EXPECT_THROW(f.validate(), Error);
}

TEST(Fluctuation, OverlappingBoxesAreRejected) {
  const IntensitySettings c{0.2, 0.2, {0.1, 0.06, 1e-3}, {0.1, 0.06, 1e-3}};
  FluctuationSpec f;
  f.r = 0.4;
  try {
    worst_case_fluctuation(table1_channel(10, 10), c, f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::infeasible_fluctuation);
  }
}

}  // namespace
}  // namespace tfqkd
