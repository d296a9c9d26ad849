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
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tfqkd/bessel.hpp"
#include "tfqkd/error.hpp"
#include "tfqkd/numeric.hpp"

namespace tfqkd {

// Channel between each party and the central beam splitter, plus the
// detector and misalignment model.
struct ChannelParams {
  double eta_a = 1.0;
  double eta_b = 1.0;
  double p_d = 0.0;
  double theta_a = 0.0;
  double theta_b = 0.0;
  double delta = 0.0;

  double theta() const { return theta_a - theta_b; }
  double phi() const { return delta * std::numbers::pi; }

  void validate() const {
    require(eta_a >= 0.0 && eta_a <= 1.0, ErrorCode::invalid_argument,
            "eta_a must lie in [0,1]");
    require(eta_b >= 0.0 && eta_b <= 1.0, ErrorCode::invalid_argument,
            "eta_b must lie in [0,1]");
    require(p_d >= 0.0 && p_d < 1.0, ErrorCode::invalid_argument,
            "p_d must lie in [0,1)");
    require(std::isfinite(theta_a) && std::isfinite(theta_b) &&
                std::isfinite(delta),
            ErrorCode::invalid_argument, "angles must be finite");
  }

  // Exchange the roles of the two parties.
  ChannelParams swapped() const {
    ChannelParams p = *this;
    std::swap(p.eta_a, p.eta_b);
    std::swap(p.theta_a, p.theta_b);
    return p;
  }
};

inline double default_misalignment_angle() {
  return 2.0 * std::asin(std::sqrt(0.02));
}

// Default noise profile: p_d = 1e-7, 2% polarization misalignment
// (theta_a = 2 asin(sqrt(0.02)), theta_b = 0) and 2% phase mismatch.
inline ChannelParams table1_channel(double loss_a_db, double loss_b_db) {
  ChannelParams p;
  p.eta_a = db_to_eta(loss_a_db);
  p.eta_b = db_to_eta(loss_b_db);
  p.p_d = 1e-7;
  p.theta_a = default_misalignment_angle();
  p.theta_b = 0.0;
  p.delta = 0.02;
  return p;
}

// Signal amplitudes for the X basis and decoy intensities for the Z basis.
// Three decoys are ordered mu0 > mu1 > mu2; four decoys mu3 > mu0 > mu1 > mu2.
struct IntensitySettings {
  double alpha_a = 0.0;
  double alpha_b = 0.0;
  std::vector<double> mu;
  std::vector<double> nu;

  std::size_t decoy_count() const { return mu.size(); }

  IntensitySettings swapped() const {
    IntensitySettings s = *this;
    std::swap(s.alpha_a, s.alpha_b);
    std::swap(s.mu, s.nu);
    return s;
  }

  void validate() const;
};

namespace detail {

inline void check_decoy_order(const std::vector<double>& x, const char* who) {
  const std::string name(who);
  require(x.size() == 3 || x.size() == 4, ErrorCode::invalid_argument,
          name + " must hold 3 or 4 intensities");
  for (double v : x)
    require(std::isfinite(v) && v >= 0.0, ErrorCode::invalid_argument,
            name + " intensities must be finite and non-negative");
  bool ok = x[0] > x[1] && x[1] > x[2];
  if (x.size() == 4) ok = ok && x[3] > x[0];
  require(ok, ErrorCode::ordering_violation,
          name + (x.size() == 3 ? " must satisfy x0 > x1 > x2"
                                : " must satisfy x3 > x0 > x1 > x2"));
}

}  // namespace detail

inline void IntensitySettings::validate() const {
  require(std::isfinite(alpha_a) && std::isfinite(alpha_b) && alpha_a >= 0.0 &&
              alpha_b >= 0.0,
          ErrorCode::invalid_argument, "amplitudes must be non-negative");
  detail::check_decoy_order(mu, "mu");
  detail::check_decoy_order(nu, "nu");
  require(mu.size() == nu.size(), ErrorCode::invalid_argument,
          "mu and nu must have the same length");
}

enum class DetectorEvent { omega_c, omega_d };
enum class GainProvenance { simulated, ingested };

// Gains Q[k][l] for Alice's intensity mu_k and Bob's nu_l, with the
// rescaled values e^{mu_k + nu_l} Q[k][l] cached at construction.
template <class Real = double>
class GainMatrix {
 public:
  GainMatrix() = default;

  GainMatrix(std::vector<double> mu, std::vector<double> nu,
             std::vector<Real> q,
             DetectorEvent event = DetectorEvent::omega_c,
             GainProvenance provenance = GainProvenance::simulated)
      : mu_(std::move(mu)),
        nu_(std::move(nu)),
        q_(std::move(q)),
        event_(event),
        provenance_(provenance) {
    require(q_.size() == mu_.size() * nu_.size(), ErrorCode::invalid_argument,
            "gain matrix dimensions do not match the intensity lists");
    for (const Real& v : q_)
      require(v >= Real(0) && v <= Real(1), ErrorCode::range_error,
              "gains must lie in [0,1]");
    rescale();
  }

  std::size_t rows() const { return mu_.size(); }
  std::size_t cols() const { return nu_.size(); }
  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& nu() const { return nu_; }
  DetectorEvent event() const { return event_; }
  GainProvenance provenance() const { return provenance_; }

  const Real& operator()(std::size_t k, std::size_t l) const {
    return q_[k * nu_.size() + l];
  }
  const Real& rescaled(std::size_t k, std::size_t l) const {
    return qt_[k * nu_.size() + l];
  }
  const std::vector<Real>& values() const { return q_; }

  GainMatrix transposed() const {
    std::vector<Real> t(q_.size());
    for (std::size_t k = 0; k < rows(); ++k)
      for (std::size_t l = 0; l < cols(); ++l)
        t[l * rows() + k] = (*this)(k, l);
    return GainMatrix(nu_, mu_, std::move(t), event_, provenance_);
  }

  template <class Other>
  GainMatrix<Other> cast() const {
    std::vector<Other> t(q_.begin(), q_.end());
    return GainMatrix<Other>(mu_, nu_, std::move(t), event_, provenance_);
  }

 private:
  void rescale() {
    using std::exp;
    qt_.resize(q_.size());
    for (std::size_t k = 0; k < rows(); ++k)
      for (std::size_t l = 0; l < cols(); ++l)
        qt_[k * cols() + l] =
            exp(Real(mu_[k]) + Real(nu_[l])) * q_[k * cols() + l];
  }

  std::vector<double> mu_;
  std::vector<double> nu_;
  std::vector<Real> q_;
  std::vector<Real> qt_;
  DetectorEvent event_ = DetectorEvent::omega_c;
  GainProvenance provenance_ = GainProvenance::simulated;
};

template <class Real = double>
struct XBasisStatistics {
  Real e_x = 0;
  Real p_x = 0;
  Real gamma = 0;
  Real chi = 0;
  bool e_x_defined = true;
};

// Error rate and detection probability in the X basis. The numerator is
// written through gamma - chi = (s_a - s_b)^2 / 2 + s_a s_b (1 - cos phi cos theta)
// with s = sqrt(eta alpha^2), so it keeps its relative precision at high
// loss and vanishes exactly for a balanced noiseless channel; p_x = 0
// leaves e_x undefined.
template <class Real = double>
XBasisStatistics<Real> x_basis_statistics(const ChannelParams& params,
                                          double alpha_a, double alpha_b) {
  using std::cos;
  using std::exp;
  using std::expm1;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  params.validate();
  require(alpha_a >= 0.0 && alpha_b >= 0.0, ErrorCode::invalid_argument,
          "amplitudes must be non-negative");
  const Real aa = alpha_a, ab = alpha_b;
  const Real ea = params.eta_a, eb = params.eta_b, pd = params.p_d;
  const Real sa = sqrt(ea * aa * aa), sb = sqrt(eb * ab * ab);
  const Real phi = params.phi(), theta = params.theta();
  const Real sp = sin(phi / Real(2)), st = sin(theta / Real(2));
  // 1 - cos phi cos theta
  const Real one_minus_c = Real(2) * sp * sp + cos(phi) * Real(2) * st * st;
  XBasisStatistics<Real> s;
  s.gamma = (ea * aa * aa + eb * ab * ab) / Real(2);
  s.chi = sa * sb * cos(phi) * cos(theta);
  const Real gap = (sa - sb) * (sa - sb) / Real(2) + sa * sb * one_minus_c;
  const Real eg = exp(-s.gamma);
  const Real sh = sinh(s.chi / Real(2));
  // e^{-chi} - (1-p_d) e^{-gamma}
  const Real num = -exp(-s.chi) * expm1(-gap) + pd * eg;
  // (e^{-chi} + e^{chi})/2 - (1-p_d) e^{-gamma}
  const Real half_den = Real(2) * sh * sh - expm1(-s.gamma) + pd * eg;
  s.p_x = (Real(1) - pd) * eg * half_den;
  if (s.p_x < Real(0)) s.p_x = 0;
  if (half_den <= Real(0)) {
    s.e_x = 0;
    s.e_x_defined = false;
  } else {
    s.e_x = num / (Real(2) * half_den);
    if (s.e_x <= Real(0)) s.e_x = 0;
    if (s.e_x > Real(1)) s.e_x = 1;
  }
  return s;
}

// Gain for intensities (mu, nu); the same value applies to either detector.
template <class Real = double>
Real gain(const ChannelParams& params, double mu, double nu) {
  using std::cos;
  using std::exp;
  using std::expm1;
  using std::sqrt;
  params.validate();
  require(mu >= 0.0 && nu >= 0.0, ErrorCode::invalid_argument,
          "intensities must be non-negative");
  const Real ea = params.eta_a, eb = params.eta_b, pd = params.p_d;
  const Real h = (Real(mu) * ea + Real(nu) * eb) / Real(2);
  const Real x = sqrt(Real(mu) * Real(nu) * ea * eb) * cos(Real(params.theta()));
  const Real eh = exp(-h);
  // (1-p_d) e^{-h} [I0(x) - (1-p_d) e^{-h}]
  Real q = (Real(1) - pd) * eh * (bessel_i0m1(x) - expm1(-h) + pd * eh);
  if (q < Real(0)) q = 0;
  if (q > Real(1)) q = 1;
  return q;
}

template <class Real = double>
GainMatrix<Real> simulate_gains(const ChannelParams& params,
                                const std::vector<double>& mu,
                                const std::vector<double>& nu,
                                DetectorEvent event = DetectorEvent::omega_c) {
  std::vector<Real> q;
  q.reserve(mu.size() * nu.size());
  for (double m : mu)
    for (double n : nu) q.push_back(gain<Real>(params, m, n));
  return GainMatrix<Real>(mu, nu, std::move(q), event,
                          GainProvenance::simulated);
}

template <class Real = double>
GainMatrix<Real> simulate_gains(const ChannelParams& params,
                                const IntensitySettings& settings) {
  return simulate_gains<Real>(params, settings.mu, settings.nu);
}

namespace detail {

// Probability that none of k photons from Alice and t photons from Bob
// (all surviving the channel) leaves through the dark port of the beam
// splitter. Expansion of the output state in creation operators with
// factorial ratios taken in log space.
template <class Real>
Real dark_port_vacuum(int k, int t, Real ca, Real sa, Real cb, Real sb,
                      const std::vector<Real>& lf) {
  using std::exp;
  CompensatedSum<Real> acc;
  const Real lk = lf[k], lt = lf[t];
  for (int i = 0; i <= k; ++i) {
    for (int j = 0; j <= t; ++j) {
      const int pmin = std::max(0, i + j - t);
      const int pmax = std::min(k, i + j);
      for (int p = pmin; p <= pmax; ++p) {
        const int r = i + j - p;
        Real lg = lf[k + t - i - j] + lf[i + j] - lk - lt;
        lg += lf[k] - lf[i] - lf[k - i] + lf[t] - lf[j] - lf[t - j];
        lg += lf[k] - lf[p] - lf[k - p] + lf[t] - lf[r] - lf[t - r];
        Real term = exp(lg);
        term *= ipow(sa, i + p) * ipow(ca, 2 * k - i - p);
        term *= ipow(sb, i + 2 * j - p) * ipow(cb, 2 * t - i - 2 * j + p);
        acc += term;
      }
    }
  }
  return acc.value() / ipow(Real(2), k + t);
}

}  // namespace detail

// Table of n,m-photon yields Y_nm for n,m <= n_max, without dark counts.
// Y_nm = sum over surviving photon numbers (k,t) != (0,0) of the binomial
// survival weights times the dark-port vacuum probability; the excluded
// (0,0) term is exactly the subtracted (1-eta_a)^n (1-eta_b)^m.
template <class Real = double>
class YieldTable {
 public:
  YieldTable(const ChannelParams& params, int n_max)
      : n_max_(n_max), y_(static_cast<std::size_t>(n_max + 1) * (n_max + 1)) {
    using std::cos;
    using std::sin;
    params.validate();
    require(n_max >= 0 && n_max <= 120, ErrorCode::size_limit,
            "yield table order must lie in [0,120]");
    const auto lf = log_factorials<Real>(2 * n_max + 2);
    const Real ca = cos(Real(params.theta_a)), sa = sin(Real(params.theta_a));
    const Real cb = cos(Real(params.theta_b)), sb = sin(Real(params.theta_b));
    std::vector<Real> dp(y_.size());
    for (int k = 0; k <= n_max; ++k)
      for (int t = 0; t <= n_max; ++t)
        dp[idx(k, t)] = detail::dark_port_vacuum(k, t, ca, sa, cb, sb, lf);
    const Real ea = params.eta_a, eb = params.eta_b;
    std::vector<Real> ba(y_.size()), bb(y_.size());
    for (int n = 0; n <= n_max; ++n)
      for (int k = 0; k <= n; ++k) {
        ba[idx(n, k)] = binomial_pmf(n, k, ea);
        bb[idx(n, k)] = binomial_pmf(n, k, eb);
      }
    for (int n = 0; n <= n_max; ++n)
      for (int m = 0; m <= n_max; ++m) {
        CompensatedSum<Real> acc;
        for (int k = 0; k <= n; ++k)
          for (int t = 0; t <= m; ++t) {
            if (k == 0 && t == 0) continue;
            acc += ba[idx(n, k)] * bb[idx(m, t)] * dp[idx(k, t)];
          }
        Real v = acc.value();
        if (v > Real(1)) v = 1;
        y_[idx(n, m)] = v;
      }
  }

  int n_max() const { return n_max_; }

  Real operator()(int n, int m) const {
    require(n >= 0 && m >= 0 && n <= n_max_ && m <= n_max_,
            ErrorCode::invalid_argument, "yield index outside the table");
    return y_[idx(n, m)];
  }

 private:
  std::size_t idx(int a, int b) const {
    return static_cast<std::size_t>(a) * (n_max_ + 1) + b;
  }

  int n_max_;
  std::vector<Real> y_;
};

// Yield Y_nm for photon numbers (n, m), without dark counts.
template <class Real = double>
Real theoretical_yield(const ChannelParams& params, int n, int m) {
  require(n >= 0 && m >= 0, ErrorCode::invalid_argument,
          "photon numbers must be non-negative");
  const int order = std::max(n, m);
  require(order <= 60, ErrorCode::size_limit,
          "theoretical_yield supports n, m <= 60");
  params.validate();
  using std::cos;
  using std::sin;
  const auto lf = log_factorials<Real>(2 * order + 2);
  const Real ca = cos(Real(params.theta_a)), sa = sin(Real(params.theta_a));
  const Real cb = cos(Real(params.theta_b)), sb = sin(Real(params.theta_b));
  const Real ea = params.eta_a, eb = params.eta_b;
  CompensatedSum<Real> acc;
  for (int k = 0; k <= n; ++k)
    for (int t = 0; t <= m; ++t) {
      if (k == 0 && t == 0) continue;
      acc += binomial_pmf(n, k, ea) * binomial_pmf(m, t, eb) *
             detail::dark_port_vacuum(k, t, ca, sa, cb, sb, lf);
    }
  Real v = acc.value();
  return v > Real(1) ? Real(1) : v;
}

}  // namespace tfqkd
