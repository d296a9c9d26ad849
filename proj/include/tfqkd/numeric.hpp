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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace tfqkd {

// Scalar helpers shared by every module. All templates accept double,
// long double and boost::multiprecision::float128; math functions are
// found by ADL for the latter.

template <class Real>
inline Real epsilon() {
  return std::numeric_limits<Real>::epsilon();
}

template <class Real>
inline Real ipow(Real x, int e) {
  Real r = 1;
  Real b = x;
  unsigned u = e < 0 ? static_cast<unsigned>(-e) : static_cast<unsigned>(e);
  while (u) {
    if (u & 1u) r *= b;
    b *= b;
    u >>= 1u;
  }
  return e < 0 ? Real(1) / r : r;
}

// Neumaier variant of Kahan summation.
template <class Real>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(Real init) : sum_(init) {}

  CompensatedSum& operator+=(Real x) {
    using std::abs;
    Real t = sum_ + x;
    if (abs(sum_) >= abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
    return *this;
  }

  Real value() const { return sum_ + comp_; }

 private:
  Real sum_ = 0;
  Real comp_ = 0;
};

// log(k!) for k = 0..n.
template <class Real>
std::vector<Real> log_factorials(int n) {
  using std::log;
  std::vector<Real> lf(static_cast<std::size_t>(n) + 1, Real(0));
  for (int k = 2; k <= n; ++k) lf[k] = lf[k - 1] + log(Real(k));
  return lf;
}

template <class Real>
Real factorial(int n) {
  Real r = 1;
  for (int k = 2; k <= n; ++k) r *= Real(k);
  return r;
}

template <class Real>
Real binomial(int n, int k) {
  if (k < 0 || k > n) return Real(0);
  if (k > n - k) k = n - k;
  Real r = 1;
  for (int i = 1; i <= k; ++i) r = r * Real(n - k + i) / Real(i);
  return r;
}

// Binomial probability mass C(n,k) p^k (1-p)^(n-k).
template <class Real>
Real binomial_pmf(int n, int k, Real p) {
  if (k < 0 || k > n) return Real(0);
  return binomial<Real>(n, k) * ipow(p, k) * ipow(Real(1) - p, n - k);
}

// Probability that a Poisson variable of mean `mean` exceeds n, summed
// directly so that tiny tails keep full relative precision.
template <class Real>
Real poisson_upper_tail(Real mean, int n) {
  using std::exp;
  if (mean == Real(0)) return Real(0);
  Real term = exp(-mean);
  for (int k = 1; k <= n + 1; ++k) term *= mean / Real(k);
  Real sum = 0;
  for (int k = n + 1; k < n + 2000; ++k) {
    sum += term;
    term *= mean / Real(k + 1);
    if (term <= sum * epsilon<Real>() * Real(1e-3)) break;
  }
  return sum;
}

// e^{-mean} mean^k / k! for k = 0..n.
template <class Real>
std::vector<Real> poisson_weights(Real mean, int n) {
  using std::exp;
  std::vector<Real> w(static_cast<std::size_t>(n) + 1);
  w[0] = exp(-mean);
  for (int k = 1; k <= n; ++k) w[k] = w[k - 1] * mean / Real(k);
  return w;
}

inline double db_to_eta(double db) { return std::pow(10.0, -db / 10.0); }

inline double eta_to_db(double eta) { return -10.0 * std::log10(eta); }

}  // namespace tfqkd
