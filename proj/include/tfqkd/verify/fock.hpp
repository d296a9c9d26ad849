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
#include <map>

#include "tfqkd/core_model.hpp"
#include "tfqkd/error.hpp"
#include "tfqkd/numeric.hpp"

namespace tfqkd::verify {

inline constexpr int kFockMaxPhotons = 12;

namespace detail {

// Output modes, in order: c_H, c_V, d_H, d_V.
using Monomial = std::array<int, 4>;
using Polynomial = std::map<Monomial, double>;

// Multiplies by a linear form, keeping only monomials in the first `keep`
// modes.
inline Polynomial multiply_linear(const Polynomial& p,
                                  const std::array<double, 4>& form,
                                  int keep = 4) {
  Polynomial out;
  for (const auto& [mono, coef] : p)
    for (int v = 0; v < keep; ++v) {
      if (form[v] == 0.0) continue;
      Monomial next = mono;
      ++next[v];
      out[next] += coef * form[v];
    }
  return out;
}

// Probability that all k + t surviving photons exit port c.
inline double all_in_port_c(int k, int t, const ChannelParams& params) {
  const double r = 1.0 / std::sqrt(2.0);
  const double ca = std::cos(params.theta_a), sa = std::sin(params.theta_a);
  const double cb = std::cos(params.theta_b), sb = std::sin(params.theta_b);
  // a^dag_pol -> (c^dag_pol + d^dag_pol)/sqrt2, b^dag_pol -> (c - d)/sqrt2
  const std::array<double, 4> fa{ca * r, sa * r, ca * r, sa * r};
  const std::array<double, 4> fb{cb * r, sb * r, -cb * r, -sb * r};
  // Exponents only grow, so a monomial touching port d never contributes.
  Polynomial p{{Monomial{0, 0, 0, 0}, 1.0}};
  for (int i = 0; i < k; ++i) p = multiply_linear(p, fa, 2);
  for (int i = 0; i < t; ++i) p = multiply_linear(p, fb, 2);
  double prob = 0;
  for (const auto& [mono, coef] : p) {
    if (mono[2] != 0 || mono[3] != 0) continue;
    prob += coef * coef * factorial<double>(mono[0]) *
            factorial<double>(mono[1]);
  }
  return prob / (factorial<double>(k) * factorial<double>(t));
}

}  // namespace detail

// Click probability of one detector (the other silent) for Fock inputs
// |n>|m>, enumerating photon survival, polarization rotation and the
// beam splitter output. No dark counts.
inline double fock_yield(const ChannelParams& params, int n, int m) {
  require(n >= 0 && m >= 0, ErrorCode::invalid_argument,
          "photon numbers must be non-negative");
  require(n + m <= kFockMaxPhotons, ErrorCode::size_limit,
          "Fock enumeration supports n + m <= 12");
  params.validate();
  double y = 0;
  for (int k = 0; k <= n; ++k)
    for (int t = 0; t <= m; ++t) {
      if (k == 0 && t == 0) continue;
      y += binomial_pmf(n, k, params.eta_a) * binomial_pmf(m, t, params.eta_b) *
           detail::all_in_port_c(k, t, params);
    }
  return y;
}

}  // namespace tfqkd::verify
