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

#ifndef DECOYQKD_SECURITY_HPP
#define DECOYQKD_SECURITY_HPP

#include <algorithm>
#include <cmath>
#include <utility>

#include "decoyqkd/channel.hpp"
#include "decoyqkd/errors.hpp"
#include "decoyqkd/model.hpp"

namespace decoyqkd {

// Single-photon quantities in the infinite-decoy limit.
struct TheoreticalSinglePhoton {
  double yield_Y1 = 0.0;
  double error_e1 = 0.0;
  double gain_Q1 = 0.0;
};

// H2(x) = -x log2(x) - (1-x) log2(1-x), continuously extended to 0 at the
// endpoints. Values within 1e-12 outside [0,1] are clamped.
inline double binary_entropy(double x) {
  constexpr double kTol = 1e-12;
  if (x < 0.0 || x > 1.0) {
    if (x < -kTol || x > 1.0 + kTol) {
      throw Error(ErrorCode::kOutOfRange, "binary_entropy argument outside [0,1]");
    }
    x = std::clamp(x, 0.0, 1.0);
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

// Symmetric u_alpha-standard-deviation band around an observed probability:
//   value * (1 -/+ u_alpha / sqrt(trials * value))
// The lower bound is clamped at 0. With no observed events the band is
// (0, 1]; a probability upper bound is capped at 1.
inline std::pair<double, double> fluct_bounds(double value, double trials,
                                              double u_alpha) {
  if (u_alpha == 0.0) return {value, value};
  const double events = trials * value;
  if (!(events > 0.0)) {
    return {0.0, 1.0};
  }
  const double rel = u_alpha / std::sqrt(events);
  return {std::max(value * (1.0 - rel), 0.0), std::min(value * (1.0 + rel), 1.0)};
}

namespace detail {

inline void require_nu_lt_mu(double mu, double nu) {
  if (!(nu > 0.0 && nu < mu)) {
    throw Error(ErrorCode::kDegenerate,
                "single-photon bound needs 0 < nu < mu (denominator mu*nu - nu^2)");
  }
}

}  // namespace detail

// One-decoy single-photon bounds:
//   Q1^L = (mu^2 e^-mu / (mu*nu - nu^2)) *
//          (Qnu^L e^nu - Qmu e^mu nu^2/mu^2 - Emu Qmu e^mu (mu^2-nu^2)/(e0 mu^2))
//   e1^U = Emu Qmu / Q1^L
// Q1^L <= 0 leaves e1^U undefined; the result is flagged NO_SECURE_KEY.
inline SinglePhotonBounds one_decoy_bounds(double mu, double nu,
                                           const MeasuredStats& stats,
                                           double qnu_lower, double e0) {
  detail::require_nu_lt_mu(mu, nu);
  SinglePhotonBounds bounds;
  bounds.qnu_lower = qnu_lower;
  const double q_mu = stats.gain_signal_Qmu;
  const double e_mu = stats.qber_signal_Emu;
  const double prefactor =
      mu * mu * std::exp(-mu) / (mu * nu - nu * nu);
  const double bracket = qnu_lower * std::exp(nu) -
                         q_mu * std::exp(mu) * nu * nu / (mu * mu) -
                         e_mu * q_mu * std::exp(mu) * (mu * mu - nu * nu) /
                             (e0 * mu * mu);
  const double q1 = prefactor * bracket;
  if (!(q1 > 0.0)) {
    bounds.q1_lower = 0.0;
    bounds.e1_upper = 0.0;
    bounds.status = BoundStatus::kNoSecureKey;
    return bounds;
  }
  bounds.q1_lower = q1;
  bounds.e1_upper = e_mu * q_mu / q1;
  if (bounds.e1_upper > 0.5) {
    // past 0.5 the privacy-amplification term is meaningless
    bounds.status = BoundStatus::kNoSecureKey;
  }
  return bounds;
}

// Weak+vacuum single-photon bounds:
//   Q1^L = (mu^2 e^-mu / (mu*nu - nu^2)) *
//          (Qnu^L e^nu - Qmu e^mu nu^2/mu^2 - Y0^U (mu^2-nu^2)/mu^2)
//   e1^U = (Emu Qmu - e0 Y0^L e^-mu) / Q1^L, clamped into [0, 0.5] before
//   entropy use (above 0.5 the result is NO_SECURE_KEY).
inline SinglePhotonBounds weak_vacuum_bounds(double mu, double nu,
                                             const MeasuredStats& stats,
                                             double qnu_lower, double y0_lower,
                                             double y0_upper, double e0) {
  detail::require_nu_lt_mu(mu, nu);
  SinglePhotonBounds bounds;
  bounds.qnu_lower = qnu_lower;
  bounds.y0_lower = y0_lower;
  bounds.y0_upper = y0_upper;
  const double q_mu = stats.gain_signal_Qmu;
  const double e_mu = stats.qber_signal_Emu;
  const double prefactor =
      mu * mu * std::exp(-mu) / (mu * nu - nu * nu);
  const double bracket = qnu_lower * std::exp(nu) -
                         q_mu * std::exp(mu) * nu * nu / (mu * mu) -
                         y0_upper * (mu * mu - nu * nu) / (mu * mu);
  const double q1 = prefactor * bracket;
  if (!(q1 > 0.0)) {
    bounds.q1_lower = 0.0;
    bounds.e1_upper = 0.0;
    bounds.status = BoundStatus::kNoSecureKey;
    return bounds;
  }
  bounds.q1_lower = q1;
  const double numerator = e_mu * q_mu - e0 * y0_lower * std::exp(-mu);
  bounds.e1_upper = std::max(numerator / q1, 0.0);
  if (bounds.e1_upper > 0.5) {
    bounds.status = BoundStatus::kNoSecureKey;
  }
  return bounds;
}

// GLLP key-rate lower bound:
//   R = q * (-Qmu f(Emu) H2(Emu) + Q1 (1 - H2(e1)))
// Raw value; may be negative.
inline double gllp_rate(double q, const MeasuredStats& stats, double q1,
                        double e1, double f) {
  return q * (-stats.gain_signal_Qmu * f * binary_entropy(stats.qber_signal_Emu) +
              q1 * (1.0 - binary_entropy(e1)));
}

// Theoretical limit of infinite data size and infinite decoy states:
//   Y1 = Y0 + eta - Y0*eta,  e1 = (e0 Y0 + e_det eta)/Y1,  Q1 = Y1 mu e^-mu
// with q = 1/2 and the channel-model signal gain/QBER.
inline double infinite_decoy_rate(const SetupParams& setup,
                                  const ChannelPoint& point, double mu) {
  const GainQber sig = expected_stats(setup, point, mu);
  TheoreticalSinglePhoton sp;
  sp.yield_Y1 = setup.dark_count_Y0 + point.eta - setup.dark_count_Y0 * point.eta;
  sp.error_e1 = sp.yield_Y1 > 0.0
                    ? (setup.vacuum_error_e0 * setup.dark_count_Y0 +
                       setup.detector_error_e_det * point.eta) /
                          sp.yield_Y1
                    : setup.vacuum_error_e0;
  sp.gain_Q1 = sp.yield_Y1 * mu * std::exp(-mu);
  MeasuredStats stats;
  stats.gain_signal_Qmu = sig.gain_Q;
  stats.qber_signal_Emu = sig.qber_E;
  return gllp_rate(0.5, stats, sp.gain_Q1, sp.error_e1, setup.ec_efficiency_f);
}

// GLLP worst case without decoy states: every multi-photon emission is
// counted as detected.
//   p_multi = 1 - (1+mu) e^-mu,  Q1^L = Qmu - p_multi,  e1^U = Emu Qmu / Q1^L
inline SinglePhotonBounds no_decoy_bounds(double mu, const MeasuredStats& stats) {
  if (!(mu > 0.0)) {
    throw Error(ErrorCode::kOutOfRange, "mu must be > 0");
  }
  SinglePhotonBounds bounds;
  const double p_multi = 1.0 - (1.0 + mu) * std::exp(-mu);
  const double q1 = stats.gain_signal_Qmu - p_multi;
  if (!(q1 > 0.0)) {
    bounds.status = BoundStatus::kNoSecureKey;
    return bounds;
  }
  bounds.q1_lower = q1;
  bounds.e1_upper = stats.qber_signal_Emu * stats.gain_signal_Qmu / q1;
  if (bounds.e1_upper > 0.5) {
    bounds.status = BoundStatus::kNoSecureKey;
  }
  return bounds;
}

inline double no_decoy_rate(double q, double mu, const MeasuredStats& stats,
                            double f) {
  const SinglePhotonBounds bounds = no_decoy_bounds(mu, stats);
  if (bounds.status == BoundStatus::kNoSecureKey) {
    return q * (-stats.gain_signal_Qmu * f *
                binary_entropy(stats.qber_signal_Emu));
  }
  return gllp_rate(q, stats, bounds.q1_lower, bounds.e1_upper, f);
}

struct AnalysisOptions {
  double ec_efficiency_f = 1.22;
  double vacuum_error_e0 = 0.5;  // definitional value; measured one wins for
                                 // weak+vacuum when stats carry it
};

inline AnalysisOptions analysis_options(const SetupParams& setup) {
  return AnalysisOptions{setup.ec_efficiency_f, setup.vacuum_error_e0};
}

namespace detail {

inline double require_stat(const std::optional<double>& field,
                           const char* name) {
  if (!field) {
    throw Error(ErrorCode::kMissingField,
                std::string("stats field '") + name +
                    "' is required for this protocol family");
  }
  return *field;
}

}  // namespace detail

// Full measured-data pipeline: fluctuation bounds on Q_nu (trials =
// frac_weak*N) and Y0 (trials = frac_vacuum*N), family single-photon
// bounds, then the GLLP rate and key length L = floor(N * max(R, 0)).
// A non-positive Q1^L still produces a report, flagged NO_SECURE_KEY with
// the raw (non-positive) rate recorded.
inline KeyRateReport analyze(const ProtocolSpec& protocol,
                             const SessionPlan& plan,
                             const MeasuredStats& stats,
                             const AnalysisOptions& opts = {}) {
  KeyRateReport report;
  report.protocol = protocol;
  report.plan = plan;
  report.stats = stats;
  const double q = stats.sift_ratio_q;
  const double f = opts.ec_efficiency_f;

  switch (protocol.family) {
    case Family::kNoDecoy: {
      report.bounds = no_decoy_bounds(protocol.mu, stats);
      break;
    }
    case Family::kOneDecoy: {
      const double q_nu = detail::require_stat(stats.gain_weak_Qnu, "gain_weak_Qnu");
      const double trials_nu = protocol.frac_weak * plan.total_pulses_N;
      const double qnu_lower = fluct_bounds(q_nu, trials_nu, plan.u_alpha).first;
      report.bounds = one_decoy_bounds(protocol.mu, protocol.nu, stats,
                                       qnu_lower, opts.vacuum_error_e0);
      break;
    }
    case Family::kWeakVacuum: {
      const double q_nu = detail::require_stat(stats.gain_weak_Qnu, "gain_weak_Qnu");
      const double y0 = detail::require_stat(stats.background_Y0, "background_Y0");
      const double e0 = stats.background_error_e0.value_or(opts.vacuum_error_e0);
      const double trials_nu = protocol.frac_weak * plan.total_pulses_N;
      const double trials_0 = protocol.frac_vacuum * plan.total_pulses_N;
      const double qnu_lower = fluct_bounds(q_nu, trials_nu, plan.u_alpha).first;
      const auto [y0_lower, y0_upper] = fluct_bounds(y0, trials_0, plan.u_alpha);
      report.bounds = weak_vacuum_bounds(protocol.mu, protocol.nu, stats,
                                         qnu_lower, y0_lower, y0_upper, e0);
      break;
    }
    case Family::kInfiniteDecoy:
      // needs the channel model, not measured statistics
      throw Error(ErrorCode::kMissingField,
                  "INFINITE_DECOY has no measured-data analysis; "
                  "use infinite_decoy_rate with a channel point");
  }

  report.status = report.bounds.status;
  if (report.status == BoundStatus::kNoSecureKey) {
    // privacy amplification gets no single-photon credit
    report.rate_lower_R =
        q * (-stats.gain_signal_Qmu * f * binary_entropy(stats.qber_signal_Emu));
  } else {
    report.rate_lower_R =
        gllp_rate(q, stats, report.bounds.q1_lower, report.bounds.e1_upper, f);
  }
  report.rate_clamped = std::max(report.rate_lower_R, 0.0);
  report.key_length_L = static_cast<std::uint64_t>(
      std::floor(plan.total_pulses_N * report.rate_clamped));
  return report;
}

}  // namespace decoyqkd

#endif  // DECOYQKD_SECURITY_HPP
