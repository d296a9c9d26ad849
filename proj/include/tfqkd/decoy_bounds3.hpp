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

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "tfqkd/core_model.hpp"
#include "tfqkd/error.hpp"
#include "tfqkd/symmetric_poly.hpp"
#include "tfqkd/yield_bounds.hpp"

namespace tfqkd {

// Weights c[i][j] of the combination sum_ij c[i][j] e^{mu_i+nu_j} Q^{ij}
// that cancels the yield families not needed for the target.
template <class Real = double>
struct CancellationCoeffs {
  std::array<std::array<Real, 3>, 3> c{};
  YieldIndex target;
};

// Raw bound values, before clamping, must not fall below this.
inline constexpr double kInconsistencyTolerance = 1e-9;
// Intensities closer than this (relative) count as repeated.
inline constexpr double kDegenerateGap = 1e-6;

namespace detail {

// One party's contribution to the cancellation weights is a vector a with
// a[0] = 1 that annihilates two of the monomial families x^0, x^1, x^2.
enum class Removed { p01, p02, p12 };

inline Removed removal_for(int photon_index) {
  switch (photon_index) {
    case 0: return Removed::p12;
    case 1: return Removed::p02;
    default: return Removed::p01;
  }
}

template <class Real>
std::array<Real, 3> party_weights(const std::array<Real, 3>& x, Removed r) {
  const Real d12 = x[1] - x[2];
  switch (r) {
    case Removed::p01:
      return {Real(1), (x[2] - x[0]) / d12, (x[0] - x[1]) / d12};
    case Removed::p02: {
      const Real s = x[1] * x[1] - x[2] * x[2];
      return {Real(1), (x[2] * x[2] - x[0] * x[0]) / s,
              (x[0] * x[0] - x[1] * x[1]) / s};
    }
    case Removed::p12:
      return {Real(1), x[0] * (x[2] - x[0]) / (x[1] * d12),
              x[0] * (x[0] - x[1]) / (x[2] * d12)};
  }
  return {};
}

inline void check_triple(std::span<const double> x, const char* who) {
  const std::string name(who);
  require(x.size() == 3, ErrorCode::invalid_argument,
          name + " must hold three intensities");
  for (double v : x)
    require(std::isfinite(v) && v > 0.0, ErrorCode::invalid_argument,
            name + " intensities must be positive");
  require(x[0] > x[1] && x[1] > x[2], ErrorCode::ordering_violation,
          name + " must satisfy x0 > x1 > x2");
  require(x[0] - x[1] > kDegenerateGap * x[0] &&
              x[1] - x[2] > kDegenerateGap * x[1],
          ErrorCode::degenerate_intensities,
          name + " contains repeated intensities");
}

// sum_{n >= nmin} F(x, n) / n!, where
// F(x, n) = sum_{i<j} x_i x_j h_{n-3}(x_i, x_j) + 2 x0 x1 x2 h_{n-4}(x)
// is the non-negative polynomial with A11(x, n) = -V(x) F(x, n).
template <class Real>
Real f_series(const std::array<Real, 3>& x, int nmin) {
  Real sum = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const std::array<Real, 2> pair{x[i], x[j]};
      sum += x[i] * x[j] *
             hom_sym_series<Real>(std::span<const Real>(pair), 3,
                                  std::max(0, nmin - 3));
    }
  sum += Real(2) * x[0] * x[1] * x[2] *
         hom_sym_series<Real>(std::span<const Real>(x), 4,
                              std::max(0, nmin - 4));
  return sum;
}

// Raw three-decoy formulas on one 3x3 grid of rescaled gains. x and y are
// Alice's and Bob's intensities in decreasing order.
template <class Real>
class ThreeDecoyCore {
 public:
  ThreeDecoyCore(const std::array<Real, 3>& x, const std::array<Real, 3>& y,
                 const std::array<std::array<Real, 3>, 3>& qt)
      : x_(x), y_(y), qt_(qt) {
    d_ = (x_[0] - x_[1]) * (x_[0] - x_[2]) * (y_[0] - y_[1]) *
         (y_[0] - y_[2]);
  }

  std::array<std::array<Real, 3>, 3> coeffs(YieldIndex t) const {
    const auto a = party_weights(x_, removal_for(t.n));
    const auto b = party_weights(y_, removal_for(t.m));
    std::array<std::array<Real, 3>, 3> c{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c[i][j] = a[i] * b[j];
    return c;
  }

  Real combination(YieldIndex t) const {
    const auto a = party_weights(x_, removal_for(t.n));
    const auto b = party_weights(y_, removal_for(t.m));
    CompensatedSum<Real> g;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g += a[i] * b[j] * qt_[i][j];
    return g.value();
  }

  Real raw(YieldIndex t) const {
    const int n = t.n, m = t.m;
    if (n == 0 && m == 0)
      return x_[1] * x_[2] * y_[1] * y_[2] * combination(t) / d_;
    if (n == 2 && m == 2) return Real(4) * combination(t) / d_;
    if (n == 0 && m == 2)
      return Real(2) * combination(t) * x_[1] * x_[2] / d_;
    if (n == 2 && m == 0)
      return Real(2) * combination(t) * y_[1] * y_[2] / d_;
    if (n == 0 && m == 4)
      return Real(24) * combination({0, 2}) * x_[1] * x_[2] /
             (d_ * h2(y_));
    if (n == 4 && m == 0)
      return Real(24) * combination({2, 0}) * y_[1] * y_[2] /
             (d_ * h2(x_));
    if (n == 1 && m == 3) return raw13(combination(t), x_, y_);
    if (n == 3 && m == 1) return raw13(combination(t), y_, x_);
    fail(ErrorCode::invalid_argument,
         "no three-decoy bound for Y" + std::to_string(n) + std::to_string(m));
  }

  // Y11 needs upper bounds on Y13 and Y31.
  Real raw11(Real y13_upper, Real y31_upper) const {
    const Real g = combination({1, 1});
    Real r = g * (x_[1] + x_[2]) * (y_[1] + y_[2]) / d_;
    r += y13_upper / Real(6) * e2(y_) + y31_upper / Real(6) * e2(x_);
    r += f_series(y_, 4) + f_series(x_, 4);
    return r;
  }

 private:
  static Real h2(const std::array<Real, 3>& v) {
    return hom_sym_sum<Real>(std::span<const Real>(v), 2);
  }
  static Real e2(const std::array<Real, 3>& v) {
    return v[0] * v[1] + v[1] * v[2] + v[0] * v[2];
  }

  // Y13 with (p, s) = (Alice, Bob); Y31 is the same with roles exchanged.
  Real raw13(Real g, const std::array<Real, 3>& p,
             const std::array<Real, 3>& s) const {
    const Real e1 = s[0] + s[1] + s[2];
    const Real sh2 = hom_sym_series<Real>(std::span<const Real>(s), 2);
    return -Real(6) * (p[1] + p[2]) * g / (d_ * e1) +
           Real(6) * f_series(p, 3) * sh2 / e1;
  }

  std::array<Real, 3> x_, y_;
  std::array<std::array<Real, 3>, 3> qt_;
  Real d_;
};

template <class Real>
Real checked_raw(Real raw, YieldIndex t) {
  if (!(raw >= Real(-kInconsistencyTolerance)))
    fail(ErrorCode::inconsistent_gains,
         "bound on Y" + std::to_string(t.n) + std::to_string(t.m) +
             " is negative; the gains admit no yield profile");
  return raw;
}

template <class Real>
Real clamp01(Real v) {
  return v < Real(0) ? Real(0) : (v > Real(1) ? Real(1) : v);
}

template <class Real>
ThreeDecoyCore<Real> core_from(const GainMatrix<Real>& gains,
                               const std::array<int, 3>& ia,
                               const std::array<int, 3>& ib) {
  std::array<Real, 3> x{}, y{};
  std::array<std::array<Real, 3>, 3> qt{};
  for (int i = 0; i < 3; ++i) {
    x[i] = gains.mu()[ia[i]];
    y[i] = gains.nu()[ib[i]];
    for (int j = 0; j < 3; ++j) qt[i][j] = gains.rescaled(ia[i], ib[j]);
  }
  return ThreeDecoyCore<Real>(x, y, qt);
}

inline bool is_three_decoy_target(YieldIndex t) {
  for (auto k : kBoundedYields)
    if (k == t) return true;
  return false;
}

}  // namespace detail

template <class Real = double>
CancellationCoeffs<Real> cancellation_coeffs(YieldIndex target,
                                             std::span<const double> mu,
                                             std::span<const double> nu) {
  detail::check_triple(mu, "mu");
  detail::check_triple(nu, "nu");
  require(detail::is_three_decoy_target(target) && target != YieldIndex{0, 4} &&
              target != YieldIndex{4, 0},
          ErrorCode::invalid_argument, "unsupported cancellation target");
  std::array<Real, 3> x{Real(mu[0]), Real(mu[1]), Real(mu[2])};
  std::array<Real, 3> y{Real(nu[0]), Real(nu[1]), Real(nu[2])};
  detail::ThreeDecoyCore<Real> core(x, y, {});
  return {core.coeffs(target), target};
}

// All nine three-decoy bounds from a 3x3 gain matrix.
template <class Real = double>
YieldBounds<Real> three_decoy_bounds(const GainMatrix<Real>& gains) {
  require(gains.rows() == 3 && gains.cols() == 3, ErrorCode::invalid_argument,
          "three-decoy bounds need a 3x3 gain matrix");
  detail::check_triple(gains.mu(), "mu");
  detail::check_triple(gains.nu(), "nu");
  const auto core = detail::core_from(gains, {0, 1, 2}, {0, 1, 2});
  YieldBounds<Real> out;
  for (YieldIndex t : kBoundedYields) {
    if (t == YieldIndex{1, 1}) continue;
    out.set(t, detail::checked_raw(core.raw(t), t), BoundSource::three_decoy);
  }
  const Real r11 = detail::checked_raw(
      core.raw11(out.get(1, 3), out.get(3, 1)), YieldIndex{1, 1});
  out.set({1, 1}, r11, BoundSource::three_decoy);
  return out;
}

// One three-decoy bound, clamped to [0,1].
template <class Real = double>
Real bound_y3(YieldIndex target, const GainMatrix<Real>& gains) {
  require(detail::is_three_decoy_target(target), ErrorCode::invalid_argument,
          "unsupported three-decoy target");
  return three_decoy_bounds(gains).get(target.n, target.m);
}

}  // namespace tfqkd
