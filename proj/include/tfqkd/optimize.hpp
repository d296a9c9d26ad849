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
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "tfqkd/core_model.hpp"
#include "tfqkd/error.hpp"
#include "tfqkd/security_rate.hpp"
#include "tfqkd/verify/series.hpp"

namespace tfqkd {

// Nelder-Mead on a box, in whatever coordinates the caller uses. Points
// outside the box are projected onto it before evaluation.
struct NelderMeadOptions {
  int max_evaluations = 600;
  double x_tolerance = 1e-7;
  double f_tolerance = 1e-11;  // relative
  double initial_step = 0.1;   // fraction of each box width
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

inline std::vector<double> project(std::vector<double> x,
                                   const std::vector<double>& lo,
                                   const std::vector<double>& hi) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  return x;
}

// Minimizes f starting from x0.
inline NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const std::vector<double>& lo,
    const std::vector<double>& hi, const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  require(lo.size() == n && hi.size() == n, ErrorCode::invalid_argument,
          "box dimension mismatch");
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(project(x, lo, hi));
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };
  std::vector<std::vector<double>> pts(n + 1, project(x0, lo, hi));
  for (std::size_t i = 0; i < n; ++i) {
    const double step = opt.initial_step * (hi[i] - lo[i]);
    pts[i + 1][i] += pts[i + 1][i] + step > hi[i] ? -step : step;
  }
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);
  std::vector<std::size_t> order(n + 1);
  while (res.evaluations < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(),
                      second = order[n - 1];
    double diam = 0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d)
        diam = std::max(diam, std::abs(pts[i][d] - pts[best][d]));
    const double spread = std::abs(fv[worst] - fv[best]);
    if (diam < opt.x_tolerance ||
        spread <= opt.f_tolerance * std::abs(fv[best]) + 1e-300)
      break;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / double(n);
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d)
        p[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
      return project(p, lo, hi);
    };
    const auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      const auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    const auto xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      pts[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d)
        pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
      fv[i] = eval(pts[i]);
    }
  }
  const auto it = std::min_element(fv.begin(), fv.end());
  res.f = *it;
  res.x = project(pts[it - fv.begin()], lo, hi);
  return res;
}

struct Interval {
  double lo = 0;
  double hi = 0;
};

enum class YieldMode {
  decoy,  // analytical three/four-decoy bounds
  exact,  // exact yields, as with infinitely many decoys
};

// Free parameters are the amplitudes and the strongest decoy of each party;
// the weaker decoys are fixed.
struct OptimizationSpec {
  int decoys = 4;
  // Fixed weak decoys in decreasing order: two for three decoys, three for
  // four decoys.
  std::vector<double> weak = {1e-3, 1e-4, 1e-5};
  Interval alpha_box{1e-3, 1.5};
  // Empty: [10 x largest weak decoy, 1].
  std::optional<Interval> strong_box;
  bool free_alpha = true;
  bool free_strong = true;
  // Values used when a parameter is not free.
  double alpha_a = 0.2, alpha_b = 0.2;
  double strong_mu = 0.5, strong_nu = 0.5;
  int starts = 16;
  std::uint64_t seed = 1;
  bool symmetric = false;  // mu-set = nu-set and alpha_a = alpha_b
  YieldMode mode = YieldMode::decoy;
  NelderMeadOptions local;

  static OptimizationSpec three_decoy() {
    OptimizationSpec s;
    s.decoys = 3;
    s.weak = {1e-4, 1e-5};
    return s;
  }
  static OptimizationSpec four_decoy() { return {}; }

  Interval strong_interval() const {
    if (strong_box) return *strong_box;
    return {10.0 * weak.front(), 1.0};
  }

  void validate() const {
    require(decoys == 3 || decoys == 4, ErrorCode::invalid_argument,
            "decoy count must be 3 or 4");
    require(static_cast<int>(weak.size()) == decoys - 1,
            ErrorCode::invalid_argument,
            "weak decoy list must hold decoys - 1 values");
    for (std::size_t i = 0; i < weak.size(); ++i) {
      require(weak[i] > 0.0, ErrorCode::invalid_argument,
              "weak decoys must be positive");
      if (i > 0)
        require(weak[i - 1] > weak[i], ErrorCode::ordering_violation,
                "weak decoys must be strictly decreasing");
    }
    const Interval sb = strong_interval();
    require(alpha_box.lo > 0.0 && alpha_box.hi >= alpha_box.lo,
            ErrorCode::infeasible, "empty or non-positive amplitude box");
    require(sb.lo > 0.0 && sb.hi >= sb.lo, ErrorCode::infeasible,
            "empty or non-positive strongest-decoy box");
    require(sb.lo > weak.front(), ErrorCode::infeasible,
            "strongest-decoy box must lie above the weak decoys");
    require(starts >= 1, ErrorCode::invalid_argument, "need at least one start");
  }
};

// Builds the intensity settings from free parameter values.
inline IntensitySettings make_settings(const OptimizationSpec& spec,
                                       double alpha_a, double alpha_b,
                                       double strong_mu, double strong_nu) {
  IntensitySettings s;
  s.alpha_a = alpha_a;
  s.alpha_b = alpha_b;
  auto list = [&](double strong) {
    std::vector<double> v;
    if (spec.decoys == 3) {
      v.push_back(strong);
      v.insert(v.end(), spec.weak.begin(), spec.weak.end());
    } else {
      v = spec.weak;
      v.push_back(strong);
    }
    return v;
  };
  s.mu = list(strong_mu);
  s.nu = list(strong_nu);
  return s;
}

inline double strongest(const std::vector<double>& v) {
  return v.size() == 4 ? v[3] : v[0];
}

// Objective wrapper shared by the optimizer and the fluctuation study.
class RateObjective {
 public:
  RateObjective(const ChannelParams& params, YieldMode mode, double f,
                int n_cut)
      : params_(params), mode_(mode), f_(f), n_cut_(n_cut) {
    params_.validate();
    if (mode_ == YieldMode::exact) exact_ = verify::exact_yields<double>(params_);
  }

  KeyRateResult<double> evaluate(const IntensitySettings& s) const {
    if (mode_ == YieldMode::exact)
      return evaluate_key_rate<double>(params_, s.alpha_a, s.alpha_b, exact_,
                                       f_, n_cut_);
    return key_rate<double>(params_, s, f_, n_cut_);
  }

  // Gains generated with the decoys of `for_gains`, bounds evaluated with
  // the decoys of `for_bounds`, X basis with the amplitudes of `for_bounds`.
  KeyRateResult<double> evaluate_split(const IntensitySettings& for_gains,
                                       const IntensitySettings& for_bounds) const;

  // Equals R where R > 0. On the R = 0 plateau it is the (negative)
  // bracket 1 - h2(e_Z) - f h2(e_X) minus the excess of the error rates
  // over 1/2, so the local search is pulled toward lower error rates
  // rather than toward p_X -> 0. Continuous across R = 0.
  double surrogate(const IntensitySettings& s) const {
    try {
      const auto r = evaluate(s);
      if (!r.e_x_defined) return -2.0;
      if (r.rate > 0.0) return r.rate;
      const double bracket = 1.0 - entropy_envelope(r.e_z_upp) -
                             f_ * entropy_envelope(r.e_x);
      return bracket - std::max(r.e_z_raw - 0.5, 0.0) -
             std::max(r.e_x - 0.5, 0.0);
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  }

  const ChannelParams& params() const { return params_; }
  double f() const { return f_; }
  int n_cut() const { return n_cut_; }

 private:
  ChannelParams params_;
  YieldMode mode_;
  double f_;
  int n_cut_;
  YieldBounds<double> exact_;
};

struct RestartRecord {
  std::vector<double> start;  // free parameters, natural units
  std::vector<double> end;
  double rate = 0;
  int evaluations = 0;
};

struct OptimizationResult {
  IntensitySettings settings;
  double rate = 0;
  KeyRateResult<double> detail;
  std::vector<RestartRecord> trace;
};

namespace detail {

// Free-parameter layout in log coordinates.
struct ParamLayout {
  const OptimizationSpec* spec;

  int size() const {
    const int per = (spec->free_alpha ? 1 : 0) + (spec->free_strong ? 1 : 0);
    return spec->symmetric ? per : 2 * per;
  }

  void box(std::vector<double>& lo, std::vector<double>& hi) const {
    lo.clear();
    hi.clear();
    const Interval sb = spec->strong_interval();
    const int parties = spec->symmetric ? 1 : 2;
    if (spec->free_alpha)
      for (int p = 0; p < parties; ++p) {
        lo.push_back(std::log(spec->alpha_box.lo));
        hi.push_back(std::log(spec->alpha_box.hi));
      }
    if (spec->free_strong)
      for (int p = 0; p < parties; ++p) {
        lo.push_back(std::log(sb.lo));
        hi.push_back(std::log(sb.hi));
      }
  }

  IntensitySettings settings(const std::vector<double>& x) const {
    std::size_t i = 0;
    double aa = spec->alpha_a, ab = spec->alpha_b;
    double sm = spec->strong_mu, sn = spec->strong_nu;
    if (spec->free_alpha) {
      aa = std::exp(x[i++]);
      ab = spec->symmetric ? aa : std::exp(x[i++]);
    }
    if (spec->free_strong) {
      sm = std::exp(x[i++]);
      sn = spec->symmetric ? sm : std::exp(x[i++]);
    }
    if (spec->symmetric) {
      ab = aa;
      sn = sm;
    }
    return make_settings(*spec, aa, ab, sm, sn);
  }
};

inline std::vector<double> exp_all(std::vector<double> x) {
  for (double& v : x) v = std::exp(v);
  return x;
}

}  // namespace detail

// Multistart Nelder-Mead over the free parameters. Starts are drawn
// uniformly in log coordinates from a seeded generator (every second one
// moved onto the balanced-arrival line); each converged
// start is polished by one restart of the local search. The best start
// wins, ties broken by the lexicographically smaller parameter vector.
inline OptimizationResult optimize_rate(const ChannelParams& params,
                                        const OptimizationSpec& spec,
                                        double f = 1.0,
                                        int n_cut = kDefaultNCut) {
  spec.validate();
  const RateObjective obj(params, spec.mode, f, n_cut);
  const detail::ParamLayout layout{&spec};
  std::vector<double> lo, hi;
  layout.box(lo, hi);
  const auto settings_of = [&](const std::vector<double>& x) {
    return layout.settings(x);
  };
  OptimizationResult out;
  const int dim = layout.size();
  if (dim == 0) {
    out.settings = settings_of({});
    out.detail = obj.evaluate(out.settings);
    out.rate = out.detail.rate;
    return out;
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto fn = [&](const std::vector<double>& x) {
    return -obj.surrogate(settings_of(x));
  };
  std::vector<double> best_x;
  double best_f = std::numeric_limits<double>::infinity();
  for (int s = 0; s < spec.starts; ++s) {
    std::vector<double> x0(dim);
    for (int d = 0; d < dim; ++d) x0[d] = lo[d] + unit(rng) * (hi[d] - lo[d]);
    // Every second start balances the arriving signal intensities,
    // eta_a alpha_a^2 = eta_b alpha_b^2, where the key-rate ridge lies.
    if (s % 2 == 1 && spec.free_alpha && !spec.symmetric &&
        params.eta_a > 0.0 && params.eta_b > 0.0)
      x0[0] = std::clamp(x0[1] + 0.5 * std::log(params.eta_b / params.eta_a),
                         lo[0], hi[0]);
    auto r = nelder_mead(fn, x0, lo, hi, spec.local);
    const auto r2 = nelder_mead(fn, r.x, lo, hi, spec.local);
    const int evals = r.evaluations + r2.evaluations;
    if (r2.f <= r.f) r = r2;
    RestartRecord rec;
    rec.start = detail::exp_all(x0);
    rec.end = detail::exp_all(r.x);
    rec.rate = std::max(-r.f, 0.0);
    rec.evaluations = evals;
    out.trace.push_back(rec);
    if (r.f < best_f || (r.f == best_f && r.x < best_x)) {
      best_f = r.f;
      best_x = r.x;
    }
  }
  out.settings = settings_of(best_x);
  out.detail = obj.evaluate(out.settings);
  out.rate = out.detail.rate;
  return out;
}

// Cyclic coordinate search over the free parameters in log coordinates:
// each sweep tries steps of +-h along one axis at a time, keeping any
// improvement of R, and halves h when a sweep makes no progress. This is
// the naive scheme that the multistart search replaces.
inline OptimizationResult coordinate_descent(const ChannelParams& params,
                                             const OptimizationSpec& spec,
                                             std::vector<double> start,
                                             double f = 1.0,
                                             int n_cut = kDefaultNCut,
                                             double min_step = 1e-6) {
  spec.validate();
  const RateObjective obj(params, spec.mode, f, n_cut);
  const detail::ParamLayout layout{&spec};
  std::vector<double> lo, hi;
  layout.box(lo, hi);
  require(static_cast<int>(start.size()) == layout.size(),
          ErrorCode::invalid_argument, "start point dimension mismatch");
  std::vector<double> x(start.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::log(start[i]);
  x = project(x, lo, hi);
  auto rate = [&](const std::vector<double>& p) {
    try {
      return obj.evaluate(layout.settings(p)).rate;
    } catch (const Error&) {
      return 0.0;
    }
  };
  double fx = rate(x);
  int evals = 1;
  double h = 0.25 * (hi.empty() ? 1.0 : (hi[0] - lo[0]));
  while (h > min_step && evals < 20000) {
    bool moved = false;
    for (std::size_t d = 0; d < x.size(); ++d)
      for (double sgn : {1.0, -1.0}) {
        auto y = x;
        y[d] = std::clamp(y[d] + sgn * h, lo[d], hi[d]);
        const double fy = rate(y);
        ++evals;
        if (fy > fx) {
          x = y;
          fx = fy;
          moved = true;
        }
      }
    if (!moved) h *= 0.5;
  }
  OptimizationResult out;
  out.settings = layout.settings(x);
  out.detail = obj.evaluate(out.settings);
  out.rate = out.detail.rate;
  out.trace.push_back({start, detail::exp_all(x), out.rate, evals});
  return out;
}

// Uncorrelated intensity fluctuations: every selected intensity x (alpha^2
// for the signals, the decoy values) independently takes any value in
// [x(1-r), x(1+r)] (half-width reading) or [x(1-r/2), x(1+r/2)].
struct FluctuationSpec {
  double r = 0.2;
  bool half_width = true;
  bool signals = true;  // alpha_a^2, alpha_b^2
  bool decoys = true;   // every decoy of both parties
  int samples = 64;     // seeded interior samples
  int polish_evaluations = 300;
  std::uint64_t seed = 7;
  // true: the drift changes the emitted pulses, so gains and bounds both
  // use the drifted values. false: gains stay at the center values and
  // only the bound formulas see the drift.
  bool perturb_gains = true;

  double half() const { return half_width ? r : r / 2; }

  void validate() const {
    require(r >= 0.0 && r <= 0.9, ErrorCode::invalid_argument,
            "fluctuation magnitude must lie in [0, 0.9]");
    require(samples >= 0 && polish_evaluations >= 0,
            ErrorCode::invalid_argument, "budgets must be non-negative");
  }
};

struct FluctuationResult {
  double min_rate = 0;
  double center_rate = 0;
  IntensitySettings argmin;
  int evaluations = 0;
};

inline KeyRateResult<double> RateObjective::evaluate_split(
    const IntensitySettings& for_gains,
    const IntensitySettings& for_bounds) const {
  if (mode_ == YieldMode::exact) return evaluate(for_bounds);
  const auto gains = simulate_gains<double>(params_, for_gains.mu, for_gains.nu);
  const GainMatrix<double> relabeled(for_bounds.mu, for_bounds.nu,
                                     gains.values(), gains.event(),
                                     gains.provenance());
  auto bounds = yield_bounds(relabeled);
  return evaluate_key_rate<double>(params_, for_bounds.alpha_a,
                                   for_bounds.alpha_b, std::move(bounds), f_,
                                   n_cut_);
}

namespace detail {

// Fluctuating coordinates: value index into a flat vector
// [alpha_a^2, alpha_b^2, mu..., nu...].
struct FluctuationLayout {
  std::vector<double> center;
  std::vector<int> active;
  std::size_t decoys = 0;

  IntensitySettings settings(const std::vector<double>& v) const {
    IntensitySettings s;
    s.alpha_a = std::sqrt(v[0]);
    s.alpha_b = std::sqrt(v[1]);
    s.mu.assign(v.begin() + 2, v.begin() + 2 + decoys);
    s.nu.assign(v.begin() + 2 + decoys, v.end());
    return s;
  }
};

// Decoy boxes must keep the required ordering for every draw.
inline void check_fluctuation_boxes(const std::vector<double>& d, double h,
                                    const char* who) {
  std::vector<double> sorted = d;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    require(sorted[i] * (1 - h) > sorted[i + 1] * (1 + h),
            ErrorCode::infeasible_fluctuation,
            std::string(who) + " fluctuation ranges overlap");
}

}  // namespace detail

// Worst-case rate over the fluctuation box: all vertices, the center,
// seeded interior samples, then a Nelder-Mead polish from the best
// candidate.
inline FluctuationResult worst_case_fluctuation(const ChannelParams& params,
                                                const IntensitySettings& center,
                                                const FluctuationSpec& fspec,
                                                double f = 1.0,
                                                int n_cut = kDefaultNCut,
                                                YieldMode mode = YieldMode::decoy) {
  fspec.validate();
  center.validate();
  const double h = fspec.half();
  if (fspec.decoys) {
    detail::check_fluctuation_boxes(center.mu, h, "mu");
    detail::check_fluctuation_boxes(center.nu, h, "nu");
  }
  const RateObjective obj(params, mode, f, n_cut);
  detail::FluctuationLayout lay;
  lay.decoys = center.mu.size();
  lay.center = {center.alpha_a * center.alpha_a, center.alpha_b * center.alpha_b};
  lay.center.insert(lay.center.end(), center.mu.begin(), center.mu.end());
  lay.center.insert(lay.center.end(), center.nu.begin(), center.nu.end());
  for (int i = 0; i < static_cast<int>(lay.center.size()); ++i)
    if ((i < 2 && fspec.signals) || (i >= 2 && fspec.decoys))
      lay.active.push_back(i);
  const std::size_t k = lay.active.size();
  require(k <= 16, ErrorCode::size_limit, "too many fluctuating intensities");

  FluctuationResult out;
  auto rate_at = [&](const std::vector<double>& v) {
    ++out.evaluations;
    const auto phys = lay.settings(v);
    try {
      const auto r = fspec.perturb_gains ? obj.evaluate(phys)
                                         : obj.evaluate_split(center, phys);
      return r.rate;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::inconsistent_gains) return 0.0;
      throw;
    }
  };
  std::vector<double> best_v = lay.center;
  double best = rate_at(best_v);
  out.center_rate = best;
  auto consider = [&](const std::vector<double>& v) {
    const double r = rate_at(v);
    if (r < best || (r == best && v < best_v)) {
      best = r;
      best_v = v;
    }
  };
  if (h > 0.0) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << k); ++mask) {
      auto v = lay.center;
      for (std::size_t b = 0; b < k; ++b)
        v[lay.active[b]] *= (mask >> b & 1) ? 1 + h : 1 - h;
      consider(v);
    }
    std::mt19937_64 rng(fspec.seed);
    std::uniform_real_distribution<double> u(-h, h);
    for (int s = 0; s < fspec.samples; ++s) {
      auto v = lay.center;
      for (int idx : lay.active) v[idx] *= 1 + u(rng);
      consider(v);
    }
    if (fspec.polish_evaluations > 0 && best > 0.0) {
      std::vector<double> lo(k), hi(k), x0(k);
      for (std::size_t b = 0; b < k; ++b) {
        lo[b] = lay.center[lay.active[b]] * (1 - h);
        hi[b] = lay.center[lay.active[b]] * (1 + h);
        x0[b] = best_v[lay.active[b]];
      }
      NelderMeadOptions opt;
      opt.max_evaluations = fspec.polish_evaluations;
      opt.initial_step = 0.05;
      auto full = [&](const std::vector<double>& x) {
        auto v = lay.center;
        for (std::size_t b = 0; b < k; ++b) v[lay.active[b]] = x[b];
        return v;
      };
      const auto r = nelder_mead([&](const std::vector<double>& x) { return rate_at(full(x)); },
                                 x0, lo, hi, opt);
      consider(full(r.x));
    }
  }
  out.min_rate = best;
  out.argmin = lay.settings(best_v);
  return out;
}

}  // namespace tfqkd
