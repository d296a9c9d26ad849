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
#include <span>
#include <vector>

#include "tfqkd/error.hpp"
#include "tfqkd/numeric.hpp"

namespace tfqkd {

// Complete homogeneous symmetric polynomial h_degree(values).
template <class Real = double>
Real hom_sym_sum(std::span<const Real> values, int degree) {
  require(degree >= 0, ErrorCode::invalid_argument, "degree must be >= 0");
  std::vector<Real> h(static_cast<std::size_t>(degree) + 1, Real(0));
  h[0] = 1;
  for (const Real& x : values)
    for (int k = 1; k <= degree; ++k) h[k] += x * h[k - 1];
  return h[degree];
}

template <class Real = double>
Real hom_sym_sum(std::initializer_list<Real> values, int degree) {
  return hom_sym_sum<Real>(std::span<const Real>(values.begin(), values.size()),
                           degree);
}

// sum_{k >= kmin} h_k(values) / (k + offset)!
//
// For distinct points this equals a divided difference of the exponential
// with its Taylor head removed, but the positive-term series keeps full
// relative precision when the points are tiny or clustered.
template <class Real = double>
Real hom_sym_series(std::span<const Real> values, int offset, int kmin = 0) {
  Real xmax = 0;
  for (const Real& x : values) {
    require(x >= Real(0), ErrorCode::invalid_argument,
            "hom_sym_series expects non-negative values");
    xmax = std::max(xmax, x);
  }
  const std::size_t q = values.size();
  // prefix[i] = h_k(x_1..x_i) for the current degree k; prefix[0] is the
  // empty set.
  std::vector<Real> prefix(q + 1, Real(1));
  Real inv_fact = Real(1) / factorial<Real>(offset);
  Real sum = 0;
  for (int k = 0; k < 4000; ++k) {
    if (k > 0) {
      inv_fact /= Real(k + offset);
      Real run = 0;
      for (std::size_t i = 1; i <= q; ++i) {
        run += values[i - 1] * prefix[i];
        prefix[i] = run;
      }
      prefix[0] = 0;
    }
    const Real term = prefix[q] * inv_fact;
    if (k >= kmin) sum += term;
    const Real ratio = Real(static_cast<int>(q)) * xmax / Real(k + offset + 1);
    if (k >= kmin && ratio < Real(0.5) &&
        term <= sum * epsilon<Real>() * Real(0.01))
      break;
  }
  return sum;
}

}  // namespace tfqkd
