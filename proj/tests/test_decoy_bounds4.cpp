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

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "tfqkd/core_model.hpp"
#include "tfqkd/decoy_bounds3.hpp"
#include "tfqkd/decoy_bounds4.hpp"
#include "tfqkd/symmetric_poly.hpp"

namespace tfqkd {
namespace {

ChannelParams reference_channel() {
  ChannelParams p;
  p.eta_a = 0.1;
  p.eta_b = std::pow(10.0, -1.5);
  p.p_d = 1e-7;
  p.theta_a = default_misalignment_angle();
  return p;
}

const std::vector<double> kMu{0.2, 0.05, 0.01, 0.5};
const std::vector<double> kNu{0.15, 0.04, 0.003, 0.6};

TEST(SymmetricPoly, DegreeOneIsTheSum) {
  const std::vector<double> v{0.5, 0.25, 0.125, 2.0};
  EXPECT_DOUBLE_EQ(hom_sym_sum<double>(v, 1), 2.875);
  EXPECT_EQ(hom_sym_sum<double>(v, 0), 1.0);
}

TEST(Dn, BaseCase) {
  const std::vector<double> ones{1, 1, 1, 1};
  EXPECT_EQ(d_n<double>(ones, 4), 4.0);
  const std::vector<double> x{0.5, 0.4, 0.2, 0.1};
  EXPECT_DOUBLE_EQ(d_n<double>(x, 4),
                   0.5 * 0.4 * 0.2 + 0.5 * 0.4 * 0.1 + 0.5 * 0.2 * 0.1 + 0.4 * 0.2 * 0.1);
}

TEST(Dn, ExactRationalAtSix) {
  using boost::multiprecision::cpp_rational;
  const std::vector<cpp_rational> xr{cpp_rational(1, 2), cpp_rational(2, 5),
                                     cpp_rational(1, 5), cpp_rational(1, 10)};
  const cpp_rational exact = d_n<cpp_rational>(xr, 6);
  const std::vector<double> x{0.5, 0.4, 0.2, 0.1};
  EXPECT_GT(exact, 0);
  EXPECT_NEAR(d_n<double>(x, 6) / static_cast<double>(exact), 1.0, 1e-14);
}

TEST(Dn, NonNegative) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-4, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> x{u(rng), u(rng), u(rng), u(rng)};
    for (int n = 4; n <= 40; ++n) EXPECT_GE(d_n<double>(x, n), 0.0) << n;
  }
}

TEST(FourDecoy, FormulaValuesAgainstReference) {
  const auto g = simulate_gains<double>(reference_channel(), kMu, kNu);
  const auto y04 = detail::four_decoy_y04(g);
  ASSERT_TRUE(y04.has_value());
  EXPECT_NEAR(y04->value / 0.2973060486880786, 1.0, 1e-12);
  EXPECT_FALSE(y04->degenerate);
  const auto y13 = detail::four_decoy_y13(g);
  ASSERT_TRUE(y13.has_value());
  EXPECT_NEAR(y13->value / 0.1141463897186602, 1.0, 1e-12);
}

TEST(FourDecoy, DegenerateFormulaAgainstReference) {
  const std::vector<double> nu{0.2, 0.05, 0.01, 0.6};
  const auto g = simulate_gains<double>(reference_channel(), kMu, nu);
  const auto y04 = detail::four_decoy_y04(g);
  ASSERT_TRUE(y04.has_value());
  EXPECT_TRUE(y04->degenerate);
  EXPECT_NEAR(y04->value / 0.2799730526954125, 1.0, 1e-12);
  const auto b = four_decoy_bounds(g);
  EXPECT_TRUE(std::isfinite(b(0, 4)));
  EXPECT_GE(b(0, 4) + 1e-12, theoretical_yield(reference_channel(), 0, 4));
}

// Regression values of the assembled bounds.
TEST(FourDecoy, AssembledBounds) {
  const auto b = four_decoy_bounds(simulate_gains<double>(reference_channel(), kMu, kNu));
  const std::pair<YieldIndex, double> expected[] = {
      {{0, 0}, 2.56443828368529e-06}, {{0, 2}, 0.0339406400182526},
      {{0, 4}, 0.297306048688565},    {{1, 1}, 0.0644331726454895},
      {{1, 3}, 0.114146389724931},    {{2, 0}, 0.104389163715271},
      {{2, 2}, 0.140908496459588},    {{3, 1}, 0.176583796591207},
      {{4, 0}, 0.857269245363384}};
  for (const auto& [idx, v] : expected)
    EXPECT_NEAR(b(idx.n, idx.m) / v, 1.0, 1e-11) << idx.n << idx.m;
  EXPECT_EQ(b.entry({0, 4}).source, BoundSource::four_decoy);
}

TEST(FourDecoy, WeightsFixFirstSubset) {
  const auto c = four_decoy_combination<double>({0, 4}, kMu, kNu);
  EXPECT_EQ(c.d[0], 1.0);
  const std::vector<double> sym{0.2, 0.05, 0.01, 0.6};
  const auto t = four_decoy_combination<double>({0, 4}, kMu, sym, true);
  EXPECT_EQ(t.d[0], 0.0);
  EXPECT_TRUE(t.degenerate);
  EXPECT_THROW(four_decoy_combination<double>({2, 2}, kMu, kNu), Error);
}

TEST(FourDecoy, ZeroGainsCombineToZero) {
  const auto c = four_decoy_combination<double>({0, 4}, kMu, kNu);
  detail::Quad<double> m{kMu[0], kMu[1], kMu[2], kMu[3]};
  detail::Quad<double> n{kNu[0], kNu[1], kNu[2], kNu[3]};
  const std::array<detail::Quad<double>, 4> zero{};
  EXPECT_EQ(detail::subset_combination<double>({0, 2}, c.d, m, n, zero).first, 0.0);
}

TEST(FourDecoy, UnitGainsClampToOne) {
  const GainMatrix<double> g(kMu, kNu, std::vector<double>(16, 1.0));
  const auto b = four_decoy_bounds(g);
  for (YieldIndex t : kBoundedYields) EXPECT_EQ(b(t.n, t.m), 1.0) << t.n << t.m;
}

TEST(FourDecoy, NeverLooserThanWeakestThreeSubset) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> loss(0, 50);
  const std::vector<double> mu{1e-3, 1e-4, 1e-5, 0.4}, nu{1e-3, 1e-4, 1e-5, 0.3};
  for (int i = 0; i < 20; ++i) {
    const auto p = table1_channel(loss(rng), loss(rng));
    const auto b4 = four_decoy_bounds(simulate_gains<double>(p, mu, nu));
    const auto b3 = three_decoy_bounds(
        simulate_gains<double>(p, {mu[0], mu[1], mu[2]}, {nu[0], nu[1], nu[2]}));
    for (YieldIndex t : kBoundedYields) EXPECT_LE(b4(t.n, t.m), b3(t.n, t.m));
  }
}

TEST(FourDecoy, SoundAtThirtyDecibels) {
  const auto p = table1_channel(30, 30);
  const std::vector<double> mu{1e-3, 1e-4, 1e-5, 0.45};
  const auto b = four_decoy_bounds(simulate_gains<double>(p, mu, mu));
  for (YieldIndex t : kBoundedYields)
    EXPECT_GE(b(t.n, t.m) + 1e-12, theoretical_yield(p, t.n, t.m)) << t.n << t.m;
}

TEST(FourDecoy, SoundOnRandomConfigurations) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> loss(0, 50), u(0, 1);
  auto decoys = [&] {
    const double s = 0.05 + 0.95 * u(rng);
    const double a = s / (2 + 30 * u(rng));
    const double b = a / (2 + 30 * u(rng));
    return std::vector<double>{a, b, b / (2 + 30 * u(rng)), s};
  };
  for (int i = 0; i < 50; ++i) {
    const auto p = table1_channel(loss(rng), loss(rng));
    const auto b = four_decoy_bounds(simulate_gains<double>(p, decoys(), decoys()));
    for (YieldIndex t : kBoundedYields)
      EXPECT_GE(b(t.n, t.m) + 1e-12, theoretical_yield(p, t.n, t.m));
  }
}

TEST(FourDecoy, ExchangeSymmetry) {
  const auto p = table1_channel(8, 21);
  const auto b = four_decoy_bounds(simulate_gains<double>(p, kMu, kNu));
  const auto s = four_decoy_bounds(simulate_gains<double>(p.swapped(), kNu, kMu));
  for (YieldIndex t : kBoundedYields)
    EXPECT_NEAR(b(t.n, t.m), s(t.m, t.n), 1e-12 * b(t.n, t.m)) << t.n << t.m;
  EXPECT_NEAR(bound4_y40(simulate_gains<double>(p, kMu, kNu)),
              bound4_y04(simulate_gains<double>(p.swapped(), kNu, kMu)), 1e-14);
  EXPECT_NEAR(bound4_y31(simulate_gains<double>(p, kMu, kNu)),
              bound4_y13(simulate_gains<double>(p.swapped(), kNu, kMu)), 1e-14);
}

TEST(FourDecoy, DegeneratePathIsContinuous) {
  const auto p = reference_channel();
  const std::vector<double> exact{0.2, 0.05, 0.01, 0.6};
  const auto at0 = detail::four_decoy_y04(simulate_gains<double>(p, kMu, exact));
  ASSERT_TRUE(at0 && at0->degenerate);
  auto deviation = [&](double eps) {
    const std::vector<double> nu{0.2, 0.05 * (1 + eps), 0.01, 0.6};
    const auto v = detail::four_decoy_y04(simulate_gains<double>(p, kMu, nu));
    EXPECT_TRUE(v.has_value() && !v->degenerate) << eps;
    return v ? std::abs(v->value / at0->value - 1) : 1.0;
  };
  EXPECT_LT(deviation(1e-3), 1e-4);
  // The gap closes linearly, including inside the extended-precision band.
  EXPECT_LT(deviation(1e-5), 0.02 * deviation(1e-3));
  EXPECT_LT(deviation(1e-7), 1e-6);
}

// Weak pairs on a line through the origin make the generic weights 0/0;
// the subset bounds must take over.
TEST(FourDecoy, CollinearWeakPairsFallBack) {
  const auto p = table1_channel(15, 15);
  const std::vector<double> mu{0.12, 0.012, 0.0012, 1.2};
  std::vector<double> nu(4);
  for (int i = 0; i < 4; ++i) nu[i] = 2 * mu[i] / 3;
  EXPECT_FALSE(detail::four_decoy_y04(simulate_gains<double>(p, mu, nu)).has_value());
  const auto b = four_decoy_bounds(simulate_gains<double>(p, mu, nu));
  EXPECT_NE(b.entry({0, 4}).source, BoundSource::four_decoy);
  for (YieldIndex t : kBoundedYields)
    EXPECT_GE(b(t.n, t.m) + 1e-12, theoretical_yield(p, t.n, t.m));
}

TEST(FourDecoy, RejectsBadOrdering) {
  const auto p = reference_channel();
  try {
    four_decoy_bounds(simulate_gains<double>(p, {0.2, 0.05, 0.01, 0.1}, kNu));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ordering_violation);
  }
}

TEST(YieldBounds, DelegatesByDimension) {
  const auto p = reference_channel();
  const IntensitySettings s3{0.3, 0.3, {0.3, 0.05, 0.01}, {0.4, 0.03, 0.002}};
  const auto g3 = simulate_gains<double>(p, s3);
  const auto a = yield_bounds(g3, s3), b = three_decoy_bounds(g3);
  for (YieldIndex t : kBoundedYields) EXPECT_EQ(a(t.n, t.m), b(t.n, t.m));
  const IntensitySettings s4{0.3, 0.3, kMu, kNu};
  EXPECT_EQ(yield_bounds(simulate_gains<double>(p, s4), s4).size(), 9u);
  EXPECT_THROW(yield_bounds(g3, s4), Error);
}

}  // namespace
}  // namespace tfqkd
