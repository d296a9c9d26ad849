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

#include "tfqkd/core_model.hpp"
#include "tfqkd/error.hpp"
#include "tfqkd/numeric.hpp"
#include "tfqkd/yield_bounds.hpp"

namespace tfqkd::verify {

enum class DarkCounts { excluded, augmented };

// Yield of one detector event including dark counts, from the dark-count
// free yield y. The detector fires on a photon with probability y, or on
// a dark count when no photon arrives at either detector, and the other
// detector must stay silent in both cases.
template <class Real = double>
Real with_dark_counts(const ChannelParams& params, Real y, int n, int m) {
  const Real pd = params.p_d;
  const Real vac = ipow(Real(1) - Real(params.eta_a), n) *
                   ipow(Real(1) - Real(params.eta_b), m);
  return (Real(1) - pd) * y + pd * (Real(1) - pd) * vac;
}

// Exact yields for n, m <= n_max, dark counts included; what a party with
// infinitely many decoys would estimate.
template <class Real = double>
YieldBounds<Real> exact_yields(const ChannelParams& params, int n_max = 16) {
  YieldTable<Real> table(params, n_max);
  YieldBounds<Real> out;
  for (int n = 0; n <= n_max; ++n)
    for (int m = 0; m <= n_max; ++m)
      out.set({n, m}, with_dark_counts(params, table(n, m), n, m),
              BoundSource::theoretical);
  return out;
}

// 1 - P(n <= N) P(m <= N): probability mass of the photon-number pairs
// left out of a series truncated at N. Yields are at most 1, so it bounds
// the truncation error of series_gain.
template <class Real = double>
Real poisson_tail_bound(Real mu, Real nu, int n) {
  const Real ta = poisson_upper_tail(mu, n);
  const Real tb = poisson_upper_tail(nu, n);
  return ta + tb - ta * tb;
}

// Poisson mixture sum_{n,m<=N} Y_nm P_mu(n) P_nu(m) of the Fock-state
// yields.
template <class Real = double>
Real series_gain(const ChannelParams& params, double mu, double nu, int n = 40,
                 DarkCounts dark = DarkCounts::augmented) {
  require(n >= 20, ErrorCode::invalid_argument, "series order must be >= 20");
  require(mu >= 0.0 && nu >= 0.0, ErrorCode::invalid_argument,
          "intensities must be non-negative");
  YieldTable<Real> table(params, n);
  const auto wa = poisson_weights(Real(mu), n);
  const auto wb = poisson_weights(Real(nu), n);
  CompensatedSum<Real> acc;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      Real y = table(i, j);
      if (dark == DarkCounts::augmented) y = with_dark_counts(params, y, i, j);
      acc += y * wa[i] * wb[j];
    }
  return acc.value();
}

}  // namespace tfqkd::verify
