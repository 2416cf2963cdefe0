//
// Copyright 2026 The decoyqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DECOYQKD_PLANNER_HPP
#define DECOYQKD_PLANNER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "decoyqkd/channel.hpp"
#include "decoyqkd/errors.hpp"
#include "decoyqkd/model.hpp"
#include "decoyqkd/security.hpp"

namespace decoyqkd {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Search grid over intensities and state fractions. The coarse stage uses
// coarse_* steps; refinement shrinks to the final steps around the
// incumbent (+-2 coarse cells per dimension).
struct GridSpec {
  Interval mu_range{0.001, 1.0};
  Interval nu_range{0.001, 1.0};
  double intensity_step = 0.001;
  double fraction_step = 0.01;
  int refine_stages = 2;
  double coarse_intensity_step = 0.02;
  double coarse_fraction_step = 0.05;
};

inline GridSpec validate_grid(const GridSpec& raw) {
  if (!(raw.intensity_step > 0.0) || !(raw.fraction_step > 0.0) ||
      !(raw.coarse_intensity_step > 0.0) || !(raw.coarse_fraction_step > 0.0)) {
    throw Error(ErrorCode::kOutOfRange, "grid steps must be > 0");
  }
  if (!(raw.mu_range.lo > 0.0 && raw.mu_range.lo <= raw.mu_range.hi &&
        raw.mu_range.hi <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "mu_range must be non-empty within (0,1]");
  }
  if (!(raw.nu_range.lo > 0.0 && raw.nu_range.lo <= raw.nu_range.hi &&
        raw.nu_range.hi <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "nu_range must be non-empty within (0,1]");
  }
  if (raw.refine_stages < 1) {
    throw Error(ErrorCode::kOutOfRange, "refine_stages must be >= 1");
  }
  return raw;
}

struct OptimizeResult {
  ProtocolSpec protocol;
  double rate_R = 0.0;
  bool secure = false;
};

struct SweepPoint {
  double distance_km = 0.0;
  double best_rate_R = 0.0;
  ProtocolSpec best_protocol;
  bool secure = false;
};

namespace detail {

// Candidate with total-order tie-break: higher R, then smaller mu, then
// smaller nu, then larger frac_signal. The argmax reduction under this
// order is associative and independent of evaluation order.
struct Candidate {
  double rate = -std::numeric_limits<double>::infinity();
  double mu = 0.0;
  double nu = 0.0;
  double frac_signal = 0.0;
  double frac_weak = 0.0;
};

inline bool better(const Candidate& a, const Candidate& b) {
  if (a.rate != b.rate) return a.rate > b.rate;
  if (a.mu != b.mu) return a.mu < b.mu;
  if (a.nu != b.nu) return a.nu < b.nu;
  return a.frac_signal > b.frac_signal;
}

// Per-intensity quantities reused across the fraction loops.
struct IntensityRow {
  double value = 0.0;      // the intensity itself
  double gain_Q = 0.0;
  double qber_E = 0.0;
  double exp_pos = 0.0;    // e^value
  double neg_ec_term = 0.0;  // -Q f H2(E), the error-correction debit
};

inline std::vector<double> grid_points(double lo, double hi, double step) {
  std::vector<double> points;
  for (double v = lo; v <= hi + step * 0.5; v += step) {
    points.push_back(std::min(v, hi));
  }
  if (points.size() >= 2 && points[points.size() - 1] == points[points.size() - 2]) {
    points.pop_back();
  }
  return points;
}

inline std::vector<IntensityRow> intensity_table(const SetupParams& setup,
                                                 const ChannelPoint& point,
                                                 const std::vector<double>& values) {
  std::vector<IntensityRow> table;
  table.reserve(values.size());
  for (double v : values) {
    const GainQber ge = expected_stats(setup, point, v);
    IntensityRow row;
    row.value = v;
    row.gain_Q = ge.gain_Q;
    row.qber_E = ge.qber_E;
    row.exp_pos = std::exp(v);
    row.neg_ec_term =
        -ge.gain_Q * setup.ec_efficiency_f * binary_entropy(ge.qber_E);
    table.push_back(row);
  }
  return table;
}

// Fast path of channel.expected_measured -> security.analyze for grid
// scanning. Mirrors the analyze() dispatch exactly; test_planner checks
// the two paths agree to machine precision.
class RateEvaluator {
 public:
  RateEvaluator(const SetupParams& setup, const ChannelPoint& point,
                const SessionPlan& plan)
      : setup_(setup), point_(point), plan_(plan) {}

  double one_decoy(const IntensityRow& mu, const IntensityRow& nu,
                   double frac_signal) const {
    const double frac_weak = 1.0 - frac_signal;
    const double qnu_lower =
        fluct_lower(nu.gain_Q, frac_weak * plan_.total_pulses_N);
    const double denom = mu.value * nu.value - nu.value * nu.value;
    const double prefactor = mu.value * mu.value / (mu.exp_pos * denom);
    const double bracket =
        qnu_lower * nu.exp_pos -
        mu.gain_Q * mu.exp_pos * nu.value * nu.value / (mu.value * mu.value) -
        mu.qber_E * mu.gain_Q * mu.exp_pos *
            (mu.value * mu.value - nu.value * nu.value) /
            (setup_.vacuum_error_e0 * mu.value * mu.value);
    const double q1 = prefactor * bracket;
    const double q = frac_signal / 2.0;
    if (!(q1 > 0.0)) return q * mu.neg_ec_term;
    const double e1 = mu.qber_E * mu.gain_Q / q1;
    if (e1 > 0.5) return q * mu.neg_ec_term;
    return q * (mu.neg_ec_term + q1 * (1.0 - binary_entropy(e1)));
  }

  double weak_vacuum(const IntensityRow& mu, const IntensityRow& nu,
                     double frac_signal, double frac_weak) const {
    const double frac_vacuum = 1.0 - frac_signal - frac_weak;
    const double y0 = setup_.dark_count_Y0;
    const double qnu_lower =
        fluct_lower(nu.gain_Q, frac_weak * plan_.total_pulses_N);
    const auto [y0_lower, y0_upper] =
        fluct_bounds(y0, frac_vacuum * plan_.total_pulses_N, plan_.u_alpha);
    const double denom = mu.value * nu.value - nu.value * nu.value;
    const double prefactor = mu.value * mu.value / (mu.exp_pos * denom);
    const double bracket =
        qnu_lower * nu.exp_pos -
        mu.gain_Q * mu.exp_pos * nu.value * nu.value / (mu.value * mu.value) -
        y0_upper * (mu.value * mu.value - nu.value * nu.value) /
            (mu.value * mu.value);
    const double q1 = prefactor * bracket;
    const double q = frac_signal / 2.0;
    if (!(q1 > 0.0)) return q * mu.neg_ec_term;
    const double e0 = setup_.vacuum_error_e0;
    const double e1 = std::max(
        (mu.qber_E * mu.gain_Q - e0 * y0_lower / mu.exp_pos) / q1, 0.0);
    if (e1 > 0.5) return q * mu.neg_ec_term;
    return q * (mu.neg_ec_term + q1 * (1.0 - binary_entropy(e1)));
  }

  double no_decoy(const IntensityRow& mu) const {
    const double p_multi = 1.0 - (1.0 + mu.value) / mu.exp_pos;
    const double q1 = mu.gain_Q - p_multi;
    const double q = 0.5;
    if (!(q1 > 0.0)) return q * mu.neg_ec_term;
    const double e1 = mu.qber_E * mu.gain_Q / q1;
    if (e1 > 0.5) return q * mu.neg_ec_term;
    return q * (mu.neg_ec_term + q1 * (1.0 - binary_entropy(e1)));
  }

  double infinite_decoy(double mu) const {
    return infinite_decoy_rate(setup_, point_, mu);
  }

 private:
  double fluct_lower(double value, double trials) const {
    if (plan_.u_alpha == 0.0) return value;
    const double events = trials * value;
    if (!(events > 0.0)) return 0.0;
    return std::max(value * (1.0 - plan_.u_alpha / std::sqrt(events)), 0.0);
  }

  SetupParams setup_;
  ChannelPoint point_;
  SessionPlan plan_;
};

}  // namespace detail

// Exhaustive coarse-to-fine search for the protocol parameters maximizing
// the analyze-rate over channel-model statistics at one distance.
// NO_DECOY and INFINITE_DECOY are one-dimensional and scanned directly at
// the final intensity resolution.
inline OptimizeResult optimize(const SetupParams& setup, double distance_km,
                               Family family, const SessionPlan& plan,
                               const GridSpec& grid_in) {
  const GridSpec grid = validate_grid(grid_in);
  const ChannelPoint point = transmittance(setup, distance_km);
  const detail::RateEvaluator eval(setup, point, plan);

  detail::Candidate best;

  if (family == Family::kNoDecoy || family == Family::kInfiniteDecoy) {
    const auto mu_values = detail::grid_points(
        grid.mu_range.lo, grid.mu_range.hi, grid.intensity_step);
    const auto table = detail::intensity_table(setup, point, mu_values);
    for (const auto& row : table) {
      const double rate = family == Family::kNoDecoy
                              ? eval.no_decoy(row)
                              : eval.infinite_decoy(row.value);
      detail::Candidate c{rate, row.value, 0.0, 1.0, 0.0};
      if (detail::better(c, best)) best = c;
    }
  } else {
    // Stage 0 scans the full ranges at the coarse steps; each later stage
    // rescans +-2 previous cells around the incumbent at finer steps,
    // reaching intensity_step/fraction_step in the final stage.
    double int_step = grid.coarse_intensity_step;
    double frac_step = grid.coarse_fraction_step;
    Interval mu_win = grid.mu_range;
    Interval nu_win = grid.nu_range;
    Interval fs_win{frac_step, 1.0 - frac_step};
    Interval fw_win{frac_step, 1.0 - frac_step};

    for (int stage = 0; stage < grid.refine_stages; ++stage) {
      if (stage > 0) {
        const double int_halo = 2.0 * int_step;
        const double frac_halo = 2.0 * frac_step;
        const double t = static_cast<double>(stage) / (grid.refine_stages - 1);
        int_step = grid.coarse_intensity_step *
                   std::pow(grid.intensity_step / grid.coarse_intensity_step, t);
        frac_step = grid.coarse_fraction_step *
                    std::pow(grid.fraction_step / grid.coarse_fraction_step, t);
        mu_win = {std::max(grid.mu_range.lo, best.mu - int_halo),
                  std::min(grid.mu_range.hi, best.mu + int_halo)};
        nu_win = {std::max(grid.nu_range.lo, best.nu - int_halo),
                  std::min(grid.nu_range.hi, best.nu + int_halo)};
        fs_win = {std::max(frac_step, best.frac_signal - frac_halo),
                  std::min(1.0 - frac_step, best.frac_signal + frac_halo)};
        fw_win = {std::max(frac_step, best.frac_weak - frac_halo),
                  std::min(1.0 - frac_step, best.frac_weak + frac_halo)};
      }

      const auto mu_values = detail::grid_points(mu_win.lo, mu_win.hi, int_step);
      const auto nu_values = detail::grid_points(nu_win.lo, nu_win.hi, int_step);
      const auto mu_table = detail::intensity_table(setup, point, mu_values);
      const auto nu_table = detail::intensity_table(setup, point, nu_values);
      const auto fs_values = detail::grid_points(fs_win.lo, fs_win.hi, frac_step);
      const auto fw_values = detail::grid_points(fw_win.lo, fw_win.hi, frac_step);

      for (const auto& mu_row : mu_table) {
        for (const auto& nu_row : nu_table) {
          if (!(nu_row.value < mu_row.value)) continue;
          if (family == Family::kOneDecoy) {
            for (double fs : fs_values) {
              const double rate = eval.one_decoy(mu_row, nu_row, fs);
              detail::Candidate c{rate, mu_row.value, nu_row.value, fs, 1.0 - fs};
              if (detail::better(c, best)) best = c;
            }
          } else {
            for (double fs : fs_values) {
              for (double fw : fw_values) {
                if (!(fs + fw < 1.0 - 1e-12)) break;
                const double rate = eval.weak_vacuum(mu_row, nu_row, fs, fw);
                detail::Candidate c{rate, mu_row.value, nu_row.value, fs, fw};
                if (detail::better(c, best)) best = c;
              }
            }
          }
        }
      }
    }
  }

  OptimizeResult result;
  result.protocol.family = family;
  result.protocol.mu = best.mu;
  result.protocol.nu = best.nu;
  result.protocol.frac_signal = best.frac_signal;
  result.protocol.frac_weak = best.frac_weak;
  result.protocol.frac_vacuum =
      family == Family::kWeakVacuum
          ? 1.0 - best.frac_signal - best.frac_weak
          : 0.0;

  // Report the rate through the canonical pipeline so the returned value
  // is exactly what analyze() would produce for these parameters.
  if (family == Family::kInfiniteDecoy) {
    result.rate_R = infinite_decoy_rate(setup, point, best.mu);
  } else {
    const MeasuredStats stats =
        expected_measured(setup, point, result.protocol);
    result.rate_R =
        analyze(result.protocol, plan, stats, analysis_options(setup))
            .rate_lower_R;
  }
  result.secure = result.rate_R > 0.0;
  return result;
}

// Per-distance optimized rate curve.
inline std::vector<SweepPoint> sweep(const SetupParams& setup, Family family,
                                     const SessionPlan& plan, double d_start,
                                     double d_end, double d_step,
                                     const GridSpec& grid) {
  if (!(d_start >= 0.0) || !(d_start < d_end) || !(d_step > 0.0)) {
    throw Error(ErrorCode::kOutOfRange,
                "sweep needs 0 <= d_start < d_end and d_step > 0");
  }
  std::vector<SweepPoint> points;
  const double tolerance = d_step * 1e-9;
  for (double d = d_start; d <= d_end + tolerance; d += d_step) {
    const OptimizeResult opt = optimize(setup, d, family, plan, grid);
    points.push_back(SweepPoint{d, opt.rate_R, opt.protocol, opt.secure});
  }
  return points;
}

// Largest distance with positive optimized rate: 0.5 km march from 0,
// then bisection to 0.01 km.
inline double max_secure_distance(const SetupParams& setup, Family family,
                                  const SessionPlan& plan,
                                  const GridSpec& grid) {
  constexpr double kMarchStep = 0.5;
  constexpr double kResolution = 0.01;
  constexpr double kDistanceCap = 1000.0;

  auto rate_at = [&](double l) {
    return optimize(setup, l, family, plan, grid).rate_R;
  };

  if (!(rate_at(0.0) > 0.0)) {
    throw Error(ErrorCode::kZeroRange,
                "optimized rate is non-positive already at zero distance");
  }
  double lo = 0.0;
  double hi = kMarchStep;
  while (rate_at(hi) > 0.0) {
    lo = hi;
    hi += kMarchStep;
    if (hi > kDistanceCap) {
      throw Error(ErrorCode::kOutOfRange,
                  "no non-positive rate found below the distance cap");
    }
  }
  while (hi - lo > kResolution) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace decoyqkd

#endif  // DECOYQKD_PLANNER_HPP
