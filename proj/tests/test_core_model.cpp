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
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include "tfqkd/bessel.hpp"
#include "tfqkd/core_model.hpp"
#include "tfqkd/numeric.hpp"
#include "tfqkd/symmetric_poly.hpp"
#include "tfqkd/verify/fock.hpp"

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

TEST(Bessel, KnownValues) {
  EXPECT_NEAR(bessel_i0(1.0), 1.2660658777520084, 1e-15);
  EXPECT_NEAR(bessel_i0(10.0) / 2815.716628466254, 1.0, 1e-14);
  EXPECT_EQ(bessel_i0(0.0), 1.0);
  EXPECT_EQ(bessel_i0m1(0.0), 0.0);
}

TEST(Bessel, RelativeErrorAgainstBoost) {
  double worst = 0;
  for (double x = 0.0; x <= 700.0; x += x < 2 ? 0.01 : 0.37) {
    const double ref = boost::math::cyl_bessel_i(0, x);
    worst = std::max(worst, std::abs(bessel_i0(x) - ref) / ref);
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Bessel, I0MinusOneKeepsPrecisionNearZero) {
  for (double x : {1e-8, 1e-5, 1e-3, 0.1}) {
    // sum_{k>=1} (x^2/4)^k / (k!)^2
    double ref = 0, term = 1, q = x * x / 4;
    for (int k = 1; k < 12; ++k) {
      term *= q / (double(k) * k);
      ref += term;
    }
    EXPECT_NEAR(bessel_i0m1(x) / ref, 1.0, 1e-14) << x;
  }
}

TEST(SymmetricPoly, SmallCases) {
  EXPECT_EQ(hom_sym_sum<double>({0.3, 0.2}, 0), 1.0);
  EXPECT_DOUBLE_EQ(hom_sym_sum<double>({0.3, 0.2, 0.5}, 1), 1.0);
  EXPECT_EQ(hom_sym_sum<double>({1.0, 1.0, 1.0, 1.0}, 2), 10.0);
  // h2(a, b) = a^2 + ab + b^2
  EXPECT_DOUBLE_EQ(hom_sym_sum<double>({2.0, 3.0}, 2), 19.0);
}

TEST(Gain, NoLightGivesDarkCountsOnly) {
  auto p = table1_channel(10, 10);
  EXPECT_DOUBLE_EQ(gain(p, 0, 0), p.p_d * (1 - p.p_d));
  p.p_d = 0;
  EXPECT_EQ(gain(p, 0, 0), 0.0);
}

TEST(Gain, FrozenReferenceValues) {
  // 50-digit reference evaluation of the closed form.
  const auto p = reference_channel();
  const auto g = simulate_gains<double>(p, {0.3, 0.05, 0.01}, {0.4, 0.03, 0.002});
  EXPECT_EQ(g.rows(), 3u);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = 0; l < 3; ++l) {
      const double mu = g.mu()[k], nu = g.nu()[l];
      const long double ld = gain<long double>(p, mu, nu);
      EXPECT_NEAR(g(k, l) / static_cast<double>(ld), 1.0, 1e-13);
      EXPECT_NEAR(g.rescaled(k, l), std::exp(mu + nu) * g(k, l), 1e-15);
    }
}

TEST(Gain, TransposeMatchesSwappedParties) {
  const auto p = reference_channel();
  const std::vector<double> mu{0.3, 0.05, 0.01}, nu{0.4, 0.03, 0.002};
  const auto g = simulate_gains<double>(p, mu, nu).transposed();
  const auto h = simulate_gains<double>(p.swapped(), nu, mu);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = 0; l < 3; ++l) EXPECT_NEAR(g(k, l), h(k, l), 1e-17);
}

TEST(Gain, MatrixRejectsOutOfRange) {
  EXPECT_THROW(GainMatrix<double>({0.3, 0.2, 0.1}, {0.3, 0.2, 0.1},
                                  std::vector<double>(9, 1.2)),
               Error);
  try {
    GainMatrix<double>({0.3}, {0.3}, {-0.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::range_error);
  }
}

TEST(IntensitySettings, OrderingViolation) {
  IntensitySettings s{0.1, 0.1, {0.3, 0.05, 0.05}, {0.3, 0.05, 0.01}};
  try {
    s.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ordering_violation);
  }
  s.mu = {0.01, 0.001, 0.0001, 0.005};  // strongest last must exceed mu0
  EXPECT_THROW(s.validate(), Error);
  s.mu = {0.01, 0.001, 0.0001, 0.5};
  s.nu = {0.01, 0.001, 0.0001, 0.5};
  EXPECT_NO_THROW(s.validate());
}

TEST(XBasis, NoiselessBalancedIsErrorFree) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    ChannelParams p;
    p.eta_a = u(rng);
    p.eta_b = p.eta_a;
    const double a = 0.01 + u(rng);
    const auto s = x_basis_statistics(p, a, a);
    EXPECT_EQ(s.e_x, 0.0);
    EXPECT_TRUE(s.e_x_defined);
    EXPECT_GT(s.p_x, 0.0);
  }
}

TEST(XBasis, ZeroAmplitudesLeaveErrorUndefined) {
  ChannelParams p;
  p.eta_a = p.eta_b = 0.5;
  const auto s = x_basis_statistics(p, 0.0, 0.0);
  EXPECT_FALSE(s.e_x_defined);
  EXPECT_EQ(s.p_x, 0.0);
}

TEST(XBasis, MatchesDirectFormulaAtModerateLoss) {
  const auto p = table1_channel(5, 12);
  const double aa = 0.3, ab = 0.5;
  const auto s = x_basis_statistics<long double>(p, aa, ab);
  const long double g = (p.eta_a * aa * aa + p.eta_b * ab * ab) / 2.0L;
  const long double c = aa * ab * std::sqrt(static_cast<long double>(p.eta_a * p.eta_b)) *
                        std::cos(static_cast<long double>(p.phi())) *
                        std::cos(static_cast<long double>(p.theta()));
  const long double pd = p.p_d;
  const long double num = std::exp(-c) - (1 - pd) * std::exp(-g);
  const long double den = std::cosh(c) - (1 - pd) * std::exp(-g);
  EXPECT_NEAR(static_cast<double>(s.e_x), static_cast<double>(num / (2 * den)), 1e-15);
  EXPECT_NEAR(static_cast<double>(s.p_x),
              static_cast<double>((1 - pd) * std::exp(-g) * den), 1e-17);
}

TEST(Yield, SinglePhotonWithoutMisalignment) {
  ChannelParams p;
  p.eta_a = 0.3;
  p.eta_b = 0.7;
  EXPECT_EQ(theoretical_yield(p, 0, 0), 0.0);
  EXPECT_NEAR(theoretical_yield(p, 1, 0), p.eta_a / 2, 1e-16);
  EXPECT_NEAR(theoretical_yield(p, 0, 1), p.eta_b / 2, 1e-16);
}

TEST(Yield, TableAgreesWithPointEvaluation) {
  const auto p = table1_channel(3, 7);
  const YieldTable<double> t(p, 12);
  for (int n = 0; n <= 12; ++n)
    for (int m = 0; m <= 12; ++m)
      EXPECT_NEAR(t(n, m), theoretical_yield(p, n, m), 1e-14) << n << "," << m;
}

TEST(Yield, AgreesWithFockEnumeration) {
  const auto p = reference_channel();
  EXPECT_NEAR(theoretical_yield(p, 2, 2), verify::fock_yield(p, 2, 2), 1e-10);
  EXPECT_NEAR(theoretical_yield(p, 1, 3), verify::fock_yield(p, 1, 3), 1e-10);
}

TEST(Yield, ExchangeSymmetry) {
  const auto p = table1_channel(4, 9);
  for (int n = 0; n <= 5; ++n)
    for (int m = 0; m <= 5; ++m)
      EXPECT_NEAR(theoretical_yield(p, n, m), theoretical_yield(p.swapped(), m, n),
                  1e-15);
}

TEST(Numeric, DecibelRoundTrip) {
  for (double db : {0.0, 3.0, 20.0, 47.5})
    EXPECT_NEAR(eta_to_db(db_to_eta(db)), db, 1e-12);
  EXPECT_DOUBLE_EQ(db_to_eta(20), 0.01);
}

}  // namespace
}  // namespace tfqkd
