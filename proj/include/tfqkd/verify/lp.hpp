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
#include <limits>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "tfqkd/core_model.hpp"
#include "tfqkd/error.hpp"
#include "tfqkd/numeric.hpp"
#include "tfqkd/verify/series.hpp"
#include "tfqkd/yield_bounds.hpp"

namespace tfqkd::verify {

// maximize c.x  subject to  row_lo <= A x <= row_hi,  col_lo <= x <= col_hi.
// Column bounds must be finite.
struct LinearProgram {
  int n_cols = 0;
  std::vector<std::vector<double>> a;
  std::vector<double> row_lo, row_hi;
  std::vector<double> col_lo, col_hi;
  std::vector<double> c;
};

enum class LpStatus { optimal, infeasible, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::optimal;
  double objective = 0;
  std::vector<double> x;
  int iterations = 0;
};

// Dense bounded-variable primal simplex, two phases, Bland's rule for both
// the entering and the leaving variable. Decoy LPs mix coefficients from
// 1 down to 1e-40 in one row, so the tableau is kept in 50-digit floating
// point.
template <class Real = boost::multiprecision::cpp_bin_float_50>
class BoundedSimplex {
 public:
  explicit BoundedSimplex(const LinearProgram& lp) : lp_(lp) {
    m_ = static_cast<int>(lp.a.size());
    n_ = lp.n_cols;
    require(static_cast<int>(lp.row_lo.size()) == m_ &&
                static_cast<int>(lp.row_hi.size()) == m_ &&
                static_cast<int>(lp.col_lo.size()) == n_ &&
                static_cast<int>(lp.col_hi.size()) == n_ &&
                static_cast<int>(lp.c.size()) == n_,
            ErrorCode::invalid_argument, "inconsistent LP dimensions");
    for (int j = 0; j < n_; ++j)
      require(std::isfinite(lp.col_lo[j]) && std::isfinite(lp.col_hi[j]) &&
                  lp.col_lo[j] <= lp.col_hi[j],
              ErrorCode::invalid_argument, "LP columns need finite bounds");
  }

  LpSolution solve(int max_iterations = 200000) {
    setup();
    LpSolution sol;
    // Phase 1: drive the artificials to zero.
    std::vector<Real> c1(total_, Real(0));
    for (int r = 0; r < m_; ++r) c1[art(r)] = -1;
    if (!iterate(c1, max_iterations, sol.iterations)) {
      sol.status = LpStatus::iteration_limit;
      return sol;
    }
    Real infeas = 0;
    for (int r = 0; r < m_; ++r) infeas += val_[art(r)];
    if (infeas > kFeasibilityTolerance * Real(m_)) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
    for (int r = 0; r < m_; ++r) hi_[art(r)] = 0;
    std::vector<Real> c2(total_, Real(0));
    for (int j = 0; j < n_; ++j) c2[j] = lp_.c[j];
    if (!iterate(c2, max_iterations, sol.iterations)) {
      sol.status = LpStatus::iteration_limit;
      return sol;
    }
    sol.x.resize(n_);
    Real obj = 0;
    for (int j = 0; j < n_; ++j) {
      Real v = val_[j] < lo_[j] ? lo_[j] : (val_[j] > hi_[j] ? hi_[j] : val_[j]);
      sol.x[j] = static_cast<double>(v);
      obj += Real(lp_.c[j]) * v;
    }
    sol.objective = static_cast<double>(obj);
    return sol;
  }

 private:
  inline static const Real kFeasibilityTolerance = Real(1e-24);
  inline static const Real kCostTolerance = Real(1e-30);
  inline static const Real kPivotTolerance = Real(1e-32);

  int slack(int r) const { return n_ + r; }
  int art(int r) const { return n_ + m_ + r; }

  void setup() {
    total_ = n_ + 2 * m_;
    const Real inf = std::numeric_limits<Real>::infinity();
    lo_.assign(total_, 0);
    hi_.assign(total_, inf);
    val_.assign(total_, 0);
    upper_.assign(total_, false);
    basic_.assign(total_, false);
    basis_.assign(m_, 0);
    t_.assign(m_, std::vector<Real>(total_, Real(0)));
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp_.col_lo[j];
      hi_[j] = lp_.col_hi[j];
      val_[j] = lo_[j];
    }
    for (int r = 0; r < m_; ++r) {
      // Rows are scaled so that their bounds are of order one.
      double dscale = std::max(std::abs(lp_.row_lo[r]), std::abs(lp_.row_hi[r]));
      if (dscale == 0.0)
        for (int j = 0; j < n_; ++j)
          dscale = std::max(dscale, std::abs(lp_.a[r][j]));
      Real scale = dscale;
      if (scale == Real(0)) scale = 1;
      Real ax = 0;
      for (int j = 0; j < n_; ++j) {
        const Real a = Real(lp_.a[r][j]) / scale;
        t_[r][j] = a;
        ax += a * val_[j];
      }
      const int s = slack(r);
      lo_[s] = Real(lp_.row_lo[r]) / scale;
      hi_[s] = Real(lp_.row_hi[r]) / scale;
      require(lo_[s] <= hi_[s], ErrorCode::invalid_argument,
              "LP row bounds reversed");
      // Equation: a.x - s + sigma * art = 0.
      t_[r][s] = -1;
      const int ar = art(r);
      if (ax >= lo_[s] && ax <= hi_[s]) {
        // The slack itself is feasible; it starts basic.
        hi_[ar] = 0;
        for (Real& v : t_[r]) v = -v;  // basic coefficient of s becomes 1
        basis_[r] = s;
        basic_[s] = true;
        val_[s] = ax;
      } else {
        const bool above = ax > hi_[s];
        val_[s] = above ? hi_[s] : lo_[s];
        upper_[s] = above;
        const Real resid = ax - val_[s];  // a.x - s
        const Real sigma = resid > Real(0) ? Real(-1) : Real(1);
        t_[r][ar] = sigma;
        if (sigma < Real(0))
          for (Real& v : t_[r]) v = -v;
        basis_[r] = ar;
        basic_[ar] = true;
        val_[ar] = abs(resid);
      }
    }
  }

  // Runs primal iterations for objective c; false on iteration limit.
  bool iterate(const std::vector<Real>& c, int max_iterations,
               int& iterations) {
    for (;;) {
      if (iterations >= max_iterations) return false;
      int enter = -1;
      Real dir = 0;
      for (int j = 0; j < total_; ++j) {
        if (basic_[j] || hi_[j] <= lo_[j]) continue;
        Real d = c[j];
        for (int r = 0; r < m_; ++r) d -= c[basis_[r]] * t_[r][j];
        if (!upper_[j] && d > kCostTolerance) {
          enter = j;
          dir = 1;
          break;
        }
        if (upper_[j] && d < -kCostTolerance) {
          enter = j;
          dir = -1;
          break;
        }
      }
      if (enter < 0) {
        refresh_basics();
        return true;
      }
      ++iterations;
      Real step = hi_[enter] - lo_[enter];
      int leave_row = -1;
      for (int r = 0; r < m_; ++r) {
        const Real alpha = dir * t_[r][enter];
        const int b = basis_[r];
        Real limit;
        if (alpha > kPivotTolerance)
          limit = (val_[b] - lo_[b]) / alpha;
        else if (alpha < -kPivotTolerance && isfinite(hi_[b]))
          limit = (hi_[b] - val_[b]) / (-alpha);
        else
          continue;
        if (limit < Real(0)) limit = 0;
        if (limit < step ||
            (limit == step && leave_row >= 0 && b < basis_[leave_row])) {
          step = limit;
          leave_row = r;
        }
      }
      require(isfinite(step), ErrorCode::infeasible,
              "LP unbounded; column bounds missing");
      val_[enter] += dir * step;
      for (int r = 0; r < m_; ++r)
        val_[basis_[r]] -= dir * step * t_[r][enter];
      if (leave_row < 0) {
        upper_[enter] = !upper_[enter];
        val_[enter] = upper_[enter] ? hi_[enter] : lo_[enter];
        continue;
      }
      const int leave = basis_[leave_row];
      const Real alpha = dir * t_[leave_row][enter];
      upper_[leave] = alpha < Real(0);
      val_[leave] = upper_[leave] ? hi_[leave] : lo_[leave];
      basic_[leave] = false;
      pivot(leave_row, enter);
      basis_[leave_row] = enter;
      basic_[enter] = true;
      upper_[enter] = false;
    }
  }

  void pivot(int row, int col) {
    auto& pr = t_[row];
    const Real p = pr[col];
    for (Real& v : pr) v /= p;
    for (int r = 0; r < m_; ++r) {
      if (r == row) continue;
      const Real f = t_[r][col];
      if (f == Real(0)) continue;
      for (int j = 0; j < total_; ++j) t_[r][j] -= f * pr[j];
      t_[r][col] = 0;
    }
  }

  // Basic values from the nonbasic ones; the equations are homogeneous.
  void refresh_basics() {
    for (int r = 0; r < m_; ++r) {
      Real v = 0;
      for (int j = 0; j < total_; ++j)
        if (!basic_[j]) v -= t_[r][j] * val_[j];
      val_[basis_[r]] = v;
    }
  }

  const LinearProgram& lp_;
  int m_ = 0, n_ = 0, total_ = 0;
  std::vector<std::vector<Real>> t_;
  std::vector<Real> lo_, hi_, val_;
  std::vector<bool> upper_, basic_;
  std::vector<int> basis_;
};

inline LpSolution solve_lp(const LinearProgram& lp) {
  return BoundedSimplex<>(lp).solve();
}

inline constexpr int kDefaultLpOrder = 10;
inline constexpr double kGainRoundingPad = 1e-14;

// Truncated decoy LP: maximize Y_target over Y_nm in [0,1], n,m <= n_t,
// with every gain constraint relaxed by the Poisson mass left out of the
// truncation. Constraints are written in gain units (scaled by
// e^{-(mu+nu)}).
inline LinearProgram truncated_decoy_lp(const GainMatrix<double>& gains,
                                        YieldIndex target,
                                        int n_t = kDefaultLpOrder,
                                        double pad_relative = kGainRoundingPad) {
  require(n_t >= std::max(target.n, target.m) + 2, ErrorCode::invalid_argument,
          "LP truncation order must be >= max(u,v) + 2");
  require(n_t <= 40, ErrorCode::size_limit, "LP truncation order too large");
  const int side = n_t + 1;
  LinearProgram lp;
  lp.n_cols = side * side;
  lp.col_lo.assign(lp.n_cols, 0.0);
  lp.col_hi.assign(lp.n_cols, 1.0);
  lp.c.assign(lp.n_cols, 0.0);
  lp.c[target.n * side + target.m] = 1.0;
  for (std::size_t k = 0; k < gains.rows(); ++k)
    for (std::size_t l = 0; l < gains.cols(); ++l) {
      const double mu = gains.mu()[k], nu = gains.nu()[l];
      const auto wa = poisson_weights(mu, n_t);
      const auto wb = poisson_weights(nu, n_t);
      std::vector<double> row(lp.n_cols);
      for (int n = 0; n <= n_t; ++n)
        for (int m = 0; m <= n_t; ++m) row[n * side + m] = wa[n] * wb[m];
      const double q = gains(k, l);
      const double tail = poisson_tail_bound(mu, nu, n_t);
      // Gains carry double rounding; without this padding nearly-equality
      // rows of weak decoys can be mutually inconsistent by a few ulps.
      const double pad = pad_relative * q;
      lp.a.push_back(std::move(row));
      lp.row_lo.push_back(q - tail - pad);
      lp.row_hi.push_back(q + pad);
    }
  return lp;
}

// LP optimum of Y_target for the given gains. The exact rows are tried
// first; when double rounding makes them inconsistent the solve is repeated
// with the gain rows padded by pad_relative.
inline double lp_yield_bound(const GainMatrix<double>& gains, YieldIndex target,
                             int n_t = kDefaultLpOrder,
                             double pad_relative = kGainRoundingPad) {
  auto sol = solve_lp(truncated_decoy_lp(gains, target, n_t, 0.0));
  if (sol.status == LpStatus::infeasible && pad_relative > 0.0)
    sol = solve_lp(truncated_decoy_lp(gains, target, n_t, pad_relative));
  require(sol.status != LpStatus::iteration_limit, ErrorCode::infeasible,
          "LP iteration limit reached");
  require(sol.status == LpStatus::optimal, ErrorCode::infeasible,
          "LP infeasible; the gains are not produced by any yield profile");
  return std::clamp(sol.objective, 0.0, 1.0);
}

}  // namespace tfqkd::verify
