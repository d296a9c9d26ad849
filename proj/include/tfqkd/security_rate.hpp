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
#include <numbers>
#include <vector>

#include "tfqkd/core_model.hpp"
#include "tfqkd/decoy_bounds4.hpp"
#include "tfqkd/error.hpp"
#include "tfqkd/numeric.hpp"
#include "tfqkd/yield_bounds.hpp"

namespace tfqkd {

inline constexpr int kDefaultNCut = 40;
inline constexpr double kTailTarget = 1e-10;

template <class Real = double>
Real binary_entropy(Real x) {
  using std::log2;
  require(x >= Real(0) && x <= Real(1), ErrorCode::invalid_argument,
          "binary entropy argument outside [0,1]");
  if (x == Real(0) || x == Real(1)) return Real(0);
  return -x * log2(x) - (Real(1) - x) * log2(Real(1) - x);
}

// h2(min(x, 1/2)): the monotone envelope, so an error-rate upper bound
// never lowers the entropy cost.
template <class Real = double>
Real entropy_envelope(Real x) {
  return x >= Real(0.5) ? Real(1) : binary_entropy(x);
}

// Repeaterless benchmark -log2(1 - eta_a eta_b).
inline double plob_bound(double eta_a, double eta_b) {
  const double p = eta_a * eta_b;
  require(p >= 0.0 && p <= 1.0, ErrorCode::invalid_argument,
          "transmittance product outside [0,1]");
  require(p < 1.0, ErrorCode::invalid_argument,
          "repeaterless bound diverges at unit transmittance");
  return -std::log1p(-p) / std::numbers::ln2;
}

template <class Real = double>
struct PhaseErrorResult {
  Real e_z = 0;        // clamped to [0,1]
  Real e_z_raw = 0;    // before clamping
  Real weighted = 0;   // e_z * p_x
  Real tail = 0;       // bound on the omitted part of both parity sums
  int n_cut = 0;
};

namespace detail {

// Partial sums of e^{-a^2/2} a^n / sqrt(n!) over one parity for n <= n_cut,
// and a bound on the rest.
template <class Real>
struct ParitySeries {
  std::vector<Real> coef;  // coefficient for n = 0..n_cut
  Real partial[2] = {0, 0};
  Real tail[2] = {0, 0};
};

template <class Real>
ParitySeries<Real> parity_series(Real a, int n_cut) {
  using std::exp;
  using std::sqrt;
  ParitySeries<Real> s;
  s.coef.resize(static_cast<std::size_t>(n_cut) + 1);
  Real c = exp(-a * a / Real(2));
  for (int n = 0; n <= n_cut; ++n) {
    if (n > 0) c *= a / sqrt(Real(n));
    s.coef[n] = c;
    s.partial[n % 2] += c;
  }
  // First omitted term of each parity, then a geometric bound with ratio
  // a^2 / sqrt((n+1)(n+2)), which decreases with n.
  Real t = c;
  for (int n = n_cut + 1; n <= n_cut + 2; ++n) {
    t *= a / sqrt(Real(n));
    const Real rho = a * a / sqrt(Real(n + 1) * Real(n + 2));
    s.tail[n % 2] = rho < Real(1) ? t / (Real(1) - rho)
                                  : std::numeric_limits<Real>::infinity();
  }
  return s;
}

}  // namespace detail

// Upper bound on the phase error rate from yield upper bounds. Stored
// indices use their bound, every other yield is set to 1; the contribution
// beyond n_cut is bounded analytically. n_cut doubles until that bound is
// below 1e-10.
template <class Real = double>
PhaseErrorResult<Real> phase_error_upper(const YieldBounds<Real>& bounds,
                                         double alpha_a, double alpha_b,
                                         Real p_x, int n_cut = kDefaultNCut,
                                         bool adaptive = true) {
  using std::sqrt;
  require(p_x > Real(0), ErrorCode::undefined_statistic,
          "phase error rate needs p_x > 0");
  require(n_cut >= 10, ErrorCode::invalid_argument, "n_cut must be >= 10");
  require(alpha_a >= 0.0 && alpha_b >= 0.0, ErrorCode::invalid_argument,
          "amplitudes must be non-negative");
  for (;;) {
    const auto sa = detail::parity_series(Real(alpha_a), n_cut);
    const auto sb = detail::parity_series(Real(alpha_b), n_cut);
    Real sum[2];
    Real tail = 0;
    for (int par = 0; par < 2; ++par) {
      // separable part with all yields 1, then corrections at stored indices
      Real s = sa.partial[par] * sb.partial[par];
      for (const auto& [idx, e] : bounds.entries()) {
        if (idx.n % 2 != par || idx.m % 2 != par) continue;
        if (idx.n > n_cut || idx.m > n_cut) continue;
        s += sa.coef[idx.n] * sb.coef[idx.m] * (sqrt(e.value) - Real(1));
      }
      const Real rem = sa.tail[par] * (sb.partial[par] + sb.tail[par]) +
                       sa.partial[par] * sb.tail[par];
      sum[par] = s + rem;
      tail += rem;
    }
    if (adaptive && !(tail < Real(kTailTarget)) && n_cut < 640) {
      n_cut *= 2;
      continue;
    }
    PhaseErrorResult<Real> r;
    r.weighted = sum[0] * sum[0] + sum[1] * sum[1];
    r.e_z_raw = r.weighted / p_x;
    r.e_z = r.e_z_raw > Real(1) ? Real(1) : r.e_z_raw;
    if (r.e_z < Real(0)) r.e_z = 0;
    r.tail = tail;
    r.n_cut = n_cut;
    return r;
  }
}

template <class Real = double>
struct KeyRateResult {
  Real rate = 0;          // R = max(R_c, 0) + max(R_d, 0)
  Real rate_omega_c = 0;  // per-event term before the max
  Real rate_omega_d = 0;
  Real e_x = 0;
  Real e_z_upp = 0;
  Real e_z_raw = 0;
  Real p_x = 0;
  double f = 1.0;
  int n_cut = kDefaultNCut;
  Real tail_bound = 0;
  bool e_x_defined = true;
  YieldBounds<Real> bounds;
};

// Key rate from given yield bounds (both events share the same statistics
// in this channel model).
template <class Real = double>
KeyRateResult<Real> evaluate_key_rate(const ChannelParams& params,
                                      double alpha_a, double alpha_b,
                                      YieldBounds<Real> bounds, double f = 1.0,
                                      int n_cut = kDefaultNCut) {
  require(f >= 0.0 && std::isfinite(f), ErrorCode::invalid_argument,
          "reconciliation efficiency must be non-negative");
  const auto xs = x_basis_statistics<Real>(params, alpha_a, alpha_b);
  KeyRateResult<Real> r;
  r.f = f;
  r.n_cut = n_cut;
  r.e_x = xs.e_x;
  r.p_x = xs.p_x;
  r.e_x_defined = xs.e_x_defined && xs.p_x > Real(0);
  r.bounds = std::move(bounds);
  if (!r.e_x_defined) return r;
  const auto pe = phase_error_upper(r.bounds, alpha_a, alpha_b, xs.p_x, n_cut);
  r.e_z_upp = pe.e_z;
  r.e_z_raw = pe.e_z_raw;
  r.n_cut = pe.n_cut;
  r.tail_bound = pe.tail;
  const Real per = xs.p_x * (Real(1) - entropy_envelope(pe.e_z) -
                             Real(f) * entropy_envelope(xs.e_x));
  r.rate_omega_c = per;
  r.rate_omega_d = per;
  r.rate = std::max(per, Real(0)) + std::max(per, Real(0));
  return r;
}

// Simulates the gains, bounds the yields with the three- or four-decoy
// formulas and assembles the rate.
template <class Real = double>
KeyRateResult<Real> key_rate(const ChannelParams& params,
                             const IntensitySettings& settings, double f = 1.0,
                             int n_cut = kDefaultNCut) {
  params.validate();
  settings.validate();
  auto gains = simulate_gains<Real>(params, settings);
  auto bounds = yield_bounds(gains);
  return evaluate_key_rate<Real>(params, settings.alpha_a, settings.alpha_b,
                                 std::move(bounds), f, n_cut);
}

// Exact yields for n, m <= n_max, as if infinitely many decoys were used.
template <class Real = double>
YieldBounds<Real> theoretical_bounds(const ChannelParams& params,
                                     int n_max = 20) {
  YieldTable<Real> table(params, n_max);
  YieldBounds<Real> out;
  for (int n = 0; n <= n_max; ++n)
    for (int m = 0; m <= n_max; ++m)
      out.set({n, m}, table(n, m), BoundSource::theoretical);
  return out;
}

}  // namespace tfqkd
