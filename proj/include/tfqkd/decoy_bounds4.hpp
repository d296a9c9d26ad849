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
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "tfqkd/core_model.hpp"
#include "tfqkd/decoy_bounds3.hpp"
#include "tfqkd/error.hpp"
#include "tfqkd/symmetric_poly.hpp"
#include "tfqkd/yield_bounds.hpp"

namespace tfqkd {

// The four 3-subsets of {0,1,2,3}, in the order 012, 013, 023, 123. The same
// subset is applied to both parties; positions inside a subset follow the
// index order.
inline constexpr std::array<std::array<int, 3>, 4> kSubsets = {
    {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};

// Relative tolerance below which mu_i = nu_i (i = 0,1,2) counts as exact.
inline constexpr double kSymmetricTolerance = 1e-9;
// Upper edge of the near-symmetric band evaluated in extended precision.
inline constexpr double kNearSymmetricBand = 1e-4;

template <class Real = double>
struct FourDecoyCombination {
  std::array<Real, 4> d{};  // weights of the subsets 012, 013, 023, 123
  YieldIndex target;
  bool degenerate = false;
};

// D_n(x0..x3) from the recursion
//   D_n = [sum_{j=1}^{n-4} p_j D_{n-j} - x0 x1 x2 x3 h_{n-5}] / (n - 4),
//   D_4 = e_3,
// with p_j the power sums.
template <class Real = double>
Real d_n(std::span<const Real> x, int n) {
  require(x.size() == 4, ErrorCode::invalid_argument,
          "d_n needs four intensities");
  require(n >= 4, ErrorCode::invalid_argument, "d_n needs n >= 4");
  std::vector<Real> d(static_cast<std::size_t>(n) + 1, Real(0));
  d[4] = x[0] * x[1] * x[2] + x[0] * x[1] * x[3] + x[0] * x[2] * x[3] +
         x[1] * x[2] * x[3];
  const Real e4 = x[0] * x[1] * x[2] * x[3];
  std::vector<Real> p(static_cast<std::size_t>(n) + 1, Real(0));
  for (int j = 1; j <= n; ++j) {
    p[j] = 0;
    for (int i = 0; i < 4; ++i) {
      Real pw = 1;
      for (int r = 0; r < j; ++r) pw *= x[i];
      p[j] += pw;
    }
  }
  for (int k = 5; k <= n; ++k) {
    Real s = 0;
    for (int j = 1; j <= k - 4; ++j) s += p[j] * d[k - j];
    s -= e4 * hom_sym_sum<Real>(x, k - 5);
    d[k] = s / Real(k - 4);
  }
  return d[n];
}

namespace detail {

template <class Real>
using Quad = std::array<Real, 4>;

template <class Real>
Quad<Real> d04_generic(const Quad<Real>& m, const Quad<Real>& n) {
  const Real m0 = m[0], m1 = m[1], m2 = m[2], m3 = m[3];
  const Real n0 = n[0], n1 = n[1], n2 = n[2], n3 = n[3];
  const Real w = m0 * (n2 - n1) + m1 * (n0 - n2) + m2 * (n1 - n0);
  Quad<Real> d;
  d[0] = 1;
  d[1] = (m0 - m2) * (n0 - n2) * (m0 * (n1 - n3) + m1 * (n3 - n0) + m3 * (n0 - n1)) /
         ((m0 - m3) * (n0 - n3) * w);
  d[2] = (m0 - m1) * (n0 - n1) * (m0 * (n2 - n3) + m2 * (n3 - n0) + m3 * (n0 - n2)) /
         ((m0 - m3) * (n0 - n3) * (-w));
  d[3] = m0 * (m0 - m1) * (m0 - m2) * (n0 - n1) * (n0 - n2) *
         (m1 * (n3 - n2) + m2 * (n1 - n3) + m3 * (n2 - n1)) /
         (m1 * (m1 - m2) * (m1 - m3) * (n1 - n2) * (n1 - n3) * (-w));
  return d;
}

// Rescaled weights for mu_i = nu_i (i = 0,1,2), where the generic ones
// degenerate.
template <class Real>
Quad<Real> d04_degenerate(const Quad<Real>& m, Real n3) {
  const Real m0 = m[0], m1 = m[1], m2 = m[2], m3 = m[3];
  return {Real(0), m3, -(m0 - m1) * m3 / (m0 - m2),
          m0 * m3 * (m0 - m1) * (m0 - m3) * (m0 - n3) /
              (m1 * (m1 - m2) * (m1 - m3) * (m1 - n3))};
}

template <class Real>
Real q13(const Quad<Real>& m, const Quad<Real>& n) {
  const Real m0 = m[0], m1 = m[1], m2 = m[2], m3 = m[3];
  return m0 * m0 * (m1 + m3) * (m2 + m3) * (n[1] - n[2]) -
         m1 * m1 * (m0 + m3) * (m2 + m3) * (n[0] - n[2]) +
         m2 * m2 * (m0 + m3) * (m1 + m3) * (n[0] - n[1]);
}

template <class Real>
Real q13_scale(const Quad<Real>& m, const Quad<Real>& n) {
  using std::abs;
  const Real m0 = m[0], m1 = m[1], m2 = m[2], m3 = m[3];
  return abs(m0 * m0 * (m1 + m3) * (m2 + m3) * (n[1] - n[2])) +
         abs(m1 * m1 * (m0 + m3) * (m2 + m3) * (n[0] - n[2])) +
         abs(m2 * m2 * (m0 + m3) * (m1 + m3) * (n[0] - n[1]));
}

template <class Real>
Quad<Real> d13_generic(const Quad<Real>& m, const Quad<Real>& n) {
  const Real m0 = m[0], m1 = m[1], m2 = m[2], m3 = m[3];
  const Real n0 = n[0], n1 = n[1], n2 = n[2], n3 = n[3];
  const Real den = -q13(m, n);
  Quad<Real> d;
  d[0] = 1;
  d[1] = (m0 - m2) * (m1 + m3) * (n0 - n2) /
         ((m0 - m3) * (m1 + m2) * (n0 - n3)) *
         (m0 * m0 * (m1 + m2) * (m2 + m3) * (n1 - n3) +
          (m0 + m2) * (m1 * m1 * (m2 + m3) * (n3 - n0) +
                       m3 * m3 * (m1 + m2) * (n0 - n1))) /
         den;
  d[2] = -(m0 - m1) * (m2 + m3) * (n0 - n1) /
         ((m0 - m3) * (m1 + m2) * (n0 - n3)) *
         (m0 * m0 * (m1 + m2) * (m1 + m3) * (n2 - n3) +
          (m0 + m1) * (m2 * m2 * (m1 + m3) * (n3 - n0) +
                       m3 * m3 * (m1 + m2) * (n0 - n2))) /
         den;
  const Real e3 = m0 * m1 * m2 + m0 * m1 * m3 + m0 * m2 * m3 + m1 * m2 * m3;
  d[3] = (m0 - m1) * (m0 - m2) * (m2 + m3) * (n0 - n1) * (n0 - n2) /
         ((m1 * m1 - m2 * m2) * (m1 - m3) * (n1 - n2) * (n1 - n3)) *
         (m0 * m0 * (m1 * m1 * (n3 - n2) + m2 * m2 * (n1 - n3) +
                     m3 * m3 * (n2 - n1)) +
          e3 * (m1 * (n3 - n2) + m2 * (n1 - n3) + m3 * (n2 - n1))) /
         q13(m, n);
  return d;
}

// H = sum_S d_S G^S with G^S the three-decoy combination on subset S, plus
// the sum of absolute values of all terms for a rounding estimate.
template <class Real>
std::pair<Real, Real> subset_combination(YieldIndex base, const Quad<Real>& d,
                                         const Quad<Real>& m,
                                         const Quad<Real>& n,
                                         const std::array<Quad<Real>, 4>& qt) {
  using std::abs;
  CompensatedSum<Real> h;
  Real mag = 0;
  for (int s = 0; s < 4; ++s) {
    if (d[s] == Real(0)) continue;
    const auto& S = kSubsets[s];
    const std::array<Real, 3> x{m[S[0]], m[S[1]], m[S[2]]};
    const std::array<Real, 3> y{n[S[0]], n[S[1]], n[S[2]]};
    const auto a = party_weights(x, removal_for(base.n));
    const auto b = party_weights(y, removal_for(base.m));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Real term = d[s] * a[i] * b[j] * qt[S[i]][S[j]];
        h += term;
        mag += abs(term);
      }
  }
  return {h.value(), mag};
}

template <class Real>
struct FourDecoyValue {
  Real value = 0;
  Real rounding = 0;  // estimated absolute rounding error of value
  bool degenerate = false;
};

template <class Real>
FourDecoyValue<Real> y04_generic(const Quad<Real>& m, const Quad<Real>& n,
                                 const std::array<Quad<Real>, 4>& qt) {
  using std::abs;
  const Real m0 = m[0], m1 = m[1], m2 = m[2], m3 = m[3];
  const Real n0 = n[0], n1 = n[1], n2 = n[2], n3 = n[3];
  const Real p04 =
      m0 * (m1 * (n0 - n1) * (n2 - n3) - m2 * (n0 - n2) * (n1 - n3) +
            m3 * (n0 - n3) * (n1 - n2)) +
      m1 * (m2 * (n0 - n3) * (n1 - n2) - m3 * (n0 - n2) * (n1 - n3)) +
      m2 * m3 * (n0 - n1) * (n2 - n3);
  const Real w = n0 * (m1 - m2) - n1 * (m0 - m2) + n2 * (m0 - m1);
  // A04(m) = k * h_{m-3}(nu)
  const Real k = -(m0 - m1) * (m0 - m2) * (n0 - n1) * (n0 - n2) * p04 /
                 (m1 * m2 * m3 * w);
  const auto [h, mag] = subset_combination({0, 2}, d04_generic(m, n), m, n, qt);
  const Real h1 = n0 + n1 + n2 + n3;
  const Real tail = m0 * m1 * m2 * m3 *
                    hom_sym_series<Real>(std::span<const Real>(m), 4) *
                    hom_sym_series<Real>(std::span<const Real>(n), 3);
  FourDecoyValue<Real> out;
  out.value = Real(24) * (h / k + tail) / h1;
  out.rounding = Real(24) * Real(16) * epsilon<Real>() * mag / abs(k * h1);
  return out;
}

template <class Real>
FourDecoyValue<Real> y04_degenerate(const Quad<Real>& m, Real n3,
                                    const std::array<Quad<Real>, 4>& qt) {
  using std::abs;
  const Real m0 = m[0], m1 = m[1], m2 = m[2], m3 = m[3];
  const Quad<Real> n{m0, m1, m2, n3};
  const Real k = -(m0 - m1) * (m0 - m1) * (m0 - m2) * (m1 - m2) * (m0 - m3) *
                 (m0 - n3) / (m1 * m2);
  const auto [h, mag] = subset_combination({0, 2}, d04_degenerate(m, n3), m, n, qt);
  const Real h1 = m0 + m1 + m2 + n3;
  const Real tail = m0 * m1 * m2 * m3 *
                    hom_sym_series<Real>(std::span<const Real>(m), 4) *
                    hom_sym_series<Real>(std::span<const Real>(n), 3);
  FourDecoyValue<Real> out;
  out.value = Real(24) * (h / k + tail) / h1;
  out.rounding = Real(24) * Real(16) * epsilon<Real>() * mag / abs(k * h1);
  out.degenerate = true;
  return out;
}

template <class Real>
std::optional<FourDecoyValue<Real>> y13_generic(
    const Quad<Real>& m, const Quad<Real>& n,
    const std::array<Quad<Real>, 4>& qt) {
  using std::abs;
  const Real m0 = m[0], m1 = m[1], m2 = m[2], m3 = m[3];
  const Real n0 = n[0], n1 = n[1], n2 = n[2], n3 = n[3];
  const Real q = q13(m, n);
  if (!(abs(q) > Real(1e-12) * q13_scale(m, n))) return std::nullopt;
  const Real p13 =
      m1 * m1 * (m2 * m2 * (n0 - n3) * (n1 - n2) - m3 * m3 * (n0 - n2) * (n1 - n3)) +
      m0 * m0 * (m1 * m1 * (n0 - n1) * (n2 - n3) - m2 * m2 * (n0 - n2) * (n1 - n3) +
                 m3 * m3 * (n0 - n3) * (n1 - n2)) +
      m2 * m2 * m3 * m3 * (n0 - n1) * (n2 - n3);
  const Real a3 = -(m0 - m1) * (m0 - m2) * (n0 - n1) * (n0 - n2) /
                  (m1 + m2) * p13 / q;
  const auto [h, mag] = subset_combination({1, 3}, d13_generic(m, n), m, n, qt);
  FourDecoyValue<Real> out;
  out.value = Real(6) * h / a3;
  out.rounding = Real(6) * Real(16) * epsilon<Real>() * mag / abs(a3);
  return out;
}

inline double max_relative_gap(std::span<const double> a,
                               std::span<const double> b) {
  double g = 0.0;
  for (int i = 0; i < 3; ++i)
    g = std::max(g, std::abs(a[i] - b[i]) / std::max(std::abs(a[i]), std::abs(b[i])));
  return g;
}

// |W| relative to its terms, where W vanishes when the three weak
// intensity pairs (mu_i, nu_i) are collinear. The generic Y04 weights are
// 0/0 there.
inline double weak_collinearity(std::span<const double> m,
                                std::span<const double> n) {
  const double t0 = n[0] * (m[1] - m[2]);
  const double t1 = n[1] * (m[0] - m[2]);
  const double t2 = n[2] * (m[0] - m[1]);
  return std::abs(t0 - t1 + t2) / (std::abs(t0) + std::abs(t1) + std::abs(t2));
}

inline void check_quad(std::span<const double> x, const char* who) {
  const std::string name(who);
  require(x.size() == 4, ErrorCode::invalid_argument,
          name + " must hold four intensities");
  for (double v : x)
    require(std::isfinite(v) && v > 0.0, ErrorCode::invalid_argument,
            name + " intensities must be positive");
  require(x[3] > x[0] && x[0] > x[1] && x[1] > x[2],
          ErrorCode::ordering_violation,
          name + " must satisfy x3 > x0 > x1 > x2");
  require(x[3] - x[0] > kDegenerateGap * x[3] &&
              x[0] - x[1] > kDegenerateGap * x[0] &&
              x[1] - x[2] > kDegenerateGap * x[1],
          ErrorCode::degenerate_intensities,
          name + " contains repeated intensities");
}

// Extended type used for the near-symmetric band.
template <class Real>
using Extended = std::conditional_t<std::is_same_v<Real, double>, long double, Real>;

template <class Real>
struct FourDecoyInputs {
  Quad<Real> m, n;
  std::array<Quad<Real>, 4> qt;
};

template <class To, class Real>
FourDecoyInputs<To> load_inputs(const GainMatrix<Real>& g) {
  FourDecoyInputs<To> in;
  for (int i = 0; i < 4; ++i) {
    in.m[i] = To(g.mu()[i]);
    in.n[i] = To(g.nu()[i]);
    for (int j = 0; j < 4; ++j) in.qt[i][j] = To(g.rescaled(i, j));
  }
  return in;
}

template <class To, class From>
FourDecoyValue<To> convert(const FourDecoyValue<From>& v) {
  return {To(v.value), To(v.rounding), v.degenerate};
}

// Y04 from the four-decoy formula. Returns nothing when the formula is too
// ill-conditioned to trust (estimated rounding above 1e-6 of the value).
template <class Real>
std::optional<FourDecoyValue<Real>> four_decoy_y04(const GainMatrix<Real>& g) {
  using std::abs;
  const double gap = max_relative_gap(g.mu(), g.nu());
  const double line = weak_collinearity(g.mu(), g.nu());
  std::optional<FourDecoyValue<Real>> v;
  if (gap <= kSymmetricTolerance) {
    const auto in = load_inputs<Real>(g);
    v = y04_degenerate(in.m, in.n[3], in.qt);
  } else if (line <= kSymmetricTolerance) {
    return std::nullopt;
  } else if (gap <= kNearSymmetricBand || line <= kNearSymmetricBand) {
    using Ext = Extended<Real>;
    const auto in = load_inputs<Ext>(g);
    v = convert<Real>(y04_generic(in.m, in.n, in.qt));
  } else {
    const auto in = load_inputs<Real>(g);
    v = y04_generic(in.m, in.n, in.qt);
  }
  using std::isfinite;
  if (!isfinite(v->value) || !(v->rounding <= Real(1e-6) * abs(v->value) + Real(1e-14)))
    return std::nullopt;
  return v;
}

template <class Real>
std::optional<FourDecoyValue<Real>> four_decoy_y13(const GainMatrix<Real>& g) {
  using std::abs;
  using std::isfinite;
  const auto in = load_inputs<Real>(g);
  auto v = y13_generic(in.m, in.n, in.qt);
  if (!v || !isfinite(v->value) ||
      !(v->rounding <= Real(1e-6) * abs(v->value) + Real(1e-14)))
    return std::nullopt;
  return v;
}

inline std::string subset_label(const std::array<int, 3>& a,
                                const std::array<int, 3>& b) {
  std::string s = "A{";
  for (int i = 0; i < 3; ++i) s += std::to_string(a[i]) + (i < 2 ? "," : "}");
  s += " B{";
  for (int i = 0; i < 3; ++i) s += std::to_string(b[i]) + (i < 2 ? "," : "}");
  return s;
}

// Three-decoy core on a pair of index subsets, with each party's
// intensities sorted in decreasing order.
template <class Real>
ThreeDecoyCore<Real> subset_core(const GainMatrix<Real>& g,
                                 std::array<int, 3> ia, std::array<int, 3> ib) {
  auto by_mu = [&](int a, int b) { return g.mu()[a] > g.mu()[b]; };
  auto by_nu = [&](int a, int b) { return g.nu()[a] > g.nu()[b]; };
  std::sort(ia.begin(), ia.end(), by_mu);
  std::sort(ib.begin(), ib.end(), by_nu);
  return core_from(g, ia, ib);
}

template <class Real>
struct Candidate {
  Real raw = std::numeric_limits<Real>::infinity();
  BoundSource source = BoundSource::three_decoy_subset;
  std::string detail;

  void offer(Real v, BoundSource s, std::string d) {
    if (v < raw) {
      raw = v;
      source = s;
      detail = std::move(d);
    }
  }
};

template <class Real>
YieldBounds<Real> four_decoy_bounds(const GainMatrix<Real>& g) {
  check_quad(g.mu(), "mu");
  check_quad(g.nu(), "nu");
  std::map<YieldIndex, Candidate<Real>> best;
  for (YieldIndex t : kBoundedYields) best[t];

  // Four-decoy formulas. Y40 and Y31 are Y04 and Y13 of the problem with
  // the parties exchanged. The rounding estimate is added so the value
  // remains an upper bound after floating-point evaluation.
  const auto gt = g.transposed();
  if (auto v = four_decoy_y04(g))
    best[{0, 4}].offer(v->value + v->rounding,
                       v->degenerate ? BoundSource::four_decoy_degenerate
                                     : BoundSource::four_decoy,
                       "four-decoy");
  if (auto v = four_decoy_y04(gt))
    best[{4, 0}].offer(v->value + v->rounding,
                       v->degenerate ? BoundSource::four_decoy_degenerate
                                     : BoundSource::four_decoy,
                       "four-decoy");
  if (auto v = four_decoy_y13(g))
    best[{1, 3}].offer(v->value + v->rounding, BoundSource::four_decoy,
                       "four-decoy");
  if (auto v = four_decoy_y13(gt))
    best[{3, 1}].offer(v->value + v->rounding, BoundSource::four_decoy,
                       "four-decoy");

  // Three-decoy formulas on every pair of 3-subsets.
  std::vector<std::pair<ThreeDecoyCore<Real>, std::string>> cores;
  for (const auto& sa : kSubsets)
    for (const auto& sb : kSubsets)
      cores.emplace_back(subset_core(g, sa, sb), subset_label(sa, sb));
  for (const auto& [core, label] : cores)
    for (YieldIndex t : kBoundedYields) {
      if (t == YieldIndex{1, 1}) continue;
      best[t].offer(checked_raw(core.raw(t), t), BoundSource::three_decoy_subset,
                    label);
    }
  const Real y13 = clamp01(best[{1, 3}].raw);
  const Real y31 = clamp01(best[{3, 1}].raw);
  for (const auto& [core, label] : cores)
    best[{1, 1}].offer(checked_raw(core.raw11(y13, y31), YieldIndex{1, 1}),
                       BoundSource::three_decoy_subset, label);

  YieldBounds<Real> out;
  for (auto& [t, c] : best)
    out.set(t, checked_raw(c.raw, t), c.source, std::move(c.detail));
  return out;
}

}  // namespace detail

// Four-decoy weights d for the requested target (Y04 generic or
// degenerate, or Y13).
template <class Real = double>
FourDecoyCombination<Real> four_decoy_combination(YieldIndex target,
                                                  std::span<const double> mu,
                                                  std::span<const double> nu,
                                                  bool degenerate = false) {
  detail::check_quad(mu, "mu");
  detail::check_quad(nu, "nu");
  detail::Quad<Real> m{Real(mu[0]), Real(mu[1]), Real(mu[2]), Real(mu[3])};
  detail::Quad<Real> n{Real(nu[0]), Real(nu[1]), Real(nu[2]), Real(nu[3])};
  FourDecoyCombination<Real> c;
  c.target = target;
  c.degenerate = degenerate;
  if (target == YieldIndex{0, 4})
    c.d = degenerate ? detail::d04_degenerate(m, n[3]) : detail::d04_generic(m, n);
  else if (target == YieldIndex{1, 3} && !degenerate)
    c.d = detail::d13_generic(m, n);
  else
    fail(ErrorCode::invalid_argument, "unsupported four-decoy combination");
  return c;
}

// All nine bounds: Y04, Y40, Y13, Y31 from the four-decoy formulas combined
// with the three-decoy formulas on all 16 subset pairs; the other five from
// the subset pairs alone.
template <class Real = double>
YieldBounds<Real> four_decoy_bounds(const GainMatrix<Real>& gains) {
  require(gains.rows() == 4 && gains.cols() == 4, ErrorCode::invalid_argument,
          "four-decoy bounds need a 4x4 gain matrix");
  return detail::four_decoy_bounds(gains);
}

template <class Real = double>
Real bound4_y04(const GainMatrix<Real>& gains) {
  return four_decoy_bounds(gains).get(0, 4);
}

template <class Real = double>
Real bound4_y40(const GainMatrix<Real>& gains) {
  return four_decoy_bounds(gains).get(4, 0);
}

template <class Real = double>
Real bound4_y13(const GainMatrix<Real>& gains) {
  return four_decoy_bounds(gains).get(1, 3);
}

template <class Real = double>
Real bound4_y31(const GainMatrix<Real>& gains) {
  return four_decoy_bounds(gains).get(3, 1);
}

// Bounds for a 3x3 or 4x4 gain matrix.
template <class Real = double>
YieldBounds<Real> yield_bounds(const GainMatrix<Real>& gains) {
  require(gains.rows() == gains.cols(), ErrorCode::invalid_argument,
          "gain matrix must be square");
  if (gains.rows() == 3) return three_decoy_bounds(gains);
  if (gains.rows() == 4) return four_decoy_bounds(gains);
  fail(ErrorCode::invalid_argument, "gain matrix must be 3x3 or 4x4");
}

template <class Real = double>
YieldBounds<Real> yield_bounds(const GainMatrix<Real>& gains,
                               const IntensitySettings& settings) {
  settings.validate();
  require(gains.mu() == settings.mu && gains.nu() == settings.nu,
          ErrorCode::invalid_argument,
          "gain matrix intensities differ from the settings");
  return yield_bounds(gains);
}

}  // namespace tfqkd
