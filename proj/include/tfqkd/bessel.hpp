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
#include <limits>
#include <numbers>

#include "tfqkd/error.hpp"
#include "tfqkd/numeric.hpp"

namespace tfqkd {

namespace detail {

// sum_{k>=first} (x^2/4)^k / (k!)^2
template <class Real>
Real i0_series(Real x, int first) {
  const Real q = x * x / Real(4);
  Real term = 1;
  for (int k = 1; k <= first; ++k) term *= q / (Real(k) * Real(k));
  Real sum = 0;
  for (int k = first; k < 100000; ++k) {
    sum += term;
    term *= q / (Real(k + 1) * Real(k + 1));
    if (term <= sum * epsilon<Real>() * Real(0.01)) break;
  }
  return sum;
}

// Large-argument expansion
//   I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! 8^k x^k),
// truncated at the smallest term.
template <class Real>
Real i0_asymptotic(Real x) {
  using std::abs;
  using std::exp;
  using std::sqrt;
  Real term = 1;
  Real sum = 1;
  for (int k = 1; k < 200; ++k) {
    Real next = term * Real(2 * k - 1) * Real(2 * k - 1) / (Real(8 * k) * x);
    if (abs(next) >= abs(term)) break;
    term = next;
    sum += term;
    if (abs(term) <= epsilon<Real>() * Real(0.01) * sum) break;
  }
  return exp(x) / sqrt(Real(2) * std::numbers::pi_v<double> * x) * sum;
}

template <class Real>
constexpr bool low_precision() {
  return std::numeric_limits<Real>::digits <= 64;
}

}  // namespace detail

// Modified Bessel function of the first kind, order zero.
template <class Real = double>
Real bessel_i0(Real x) {
  using std::abs;
  using std::isfinite;
  require(!(x != x), ErrorCode::invalid_argument, "bessel_i0 of NaN");
  x = abs(x);
  Real r;
  if (detail::low_precision<Real>() && x >= Real(15))
    r = detail::i0_asymptotic(x);
  else
    r = detail::i0_series(x, 0);
  if (!isfinite(r) || r > std::numeric_limits<Real>::max())
    fail(ErrorCode::saturation, "bessel_i0 overflows the exponent range");
  return r;
}

// I0(x) - 1 without cancellation for small arguments.
template <class Real = double>
Real bessel_i0m1(Real x) {
  using std::abs;
  x = abs(x);
  if (x < Real(2)) return detail::i0_series(x, 1);
  return bessel_i0(x) - Real(1);
}

}  // namespace tfqkd
