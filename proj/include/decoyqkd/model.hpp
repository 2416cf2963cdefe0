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

#ifndef DECOYQKD_MODEL_HPP
#define DECOYQKD_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "decoyqkd/errors.hpp"

namespace decoyqkd {

// Intrinsic device characteristics of a QKD set-up.
struct SetupParams {
  double dark_count_Y0 = 0.0;
  double detector_error_e_det = 0.0;
  double receiver_efficiency_eta_bob = 1.0;
  double loss_alpha_db_per_km = 0.0;
  double vacuum_error_e0 = 0.5;
  double ec_efficiency_f = 1.22;
};

enum class Family {
  kNoDecoy,
  kOneDecoy,
  kWeakVacuum,
  kInfiniteDecoy,
};

inline const char* to_string(Family family) {
  switch (family) {
    case Family::kNoDecoy: return "NO_DECOY";
    case Family::kOneDecoy: return "ONE_DECOY";
    case Family::kWeakVacuum: return "WEAK_VACUUM";
    case Family::kInfiniteDecoy: return "INFINITE_DECOY";
  }
  return "UNKNOWN";
}

inline Family family_from_string(const std::string& name) {
  if (name == "NO_DECOY") return Family::kNoDecoy;
  if (name == "ONE_DECOY") return Family::kOneDecoy;
  if (name == "WEAK_VACUUM") return Family::kWeakVacuum;
  if (name == "INFINITE_DECOY") return Family::kInfiniteDecoy;
  throw Error(ErrorCode::kParseError, "unknown protocol family '" + name + "'");
}

inline bool has_weak_state(Family family) {
  return family == Family::kOneDecoy || family == Family::kWeakVacuum;
}

// A protocol family plus its intensities and per-state pulse fractions.
// NO_DECOY and INFINITE_DECOY reuse the same shape with frac_signal = 1.
struct ProtocolSpec {
  Family family = Family::kOneDecoy;
  double mu = 0.0;
  double nu = 0.0;  // meaningful only when has_weak_state(family)
  double frac_signal = 1.0;
  double frac_weak = 0.0;
  double frac_vacuum = 0.0;
};

struct SessionPlan {
  double total_pulses_N = 1.0;
  double u_alpha = 0.0;
};

// Per-state gains/QBERs plus sifting ratio, as measured or simulated.
// Weak/background fields are optional per family.
struct MeasuredStats {
  double gain_signal_Qmu = 0.0;
  double qber_signal_Emu = 0.0;
  std::optional<double> gain_weak_Qnu;
  std::optional<double> qber_weak_Enu;
  std::optional<double> background_Y0;
  std::optional<double> background_error_e0;
  double sift_ratio_q = 0.5;
};

enum class BoundStatus {
  kOk,
  kNoSecureKey,
};

// Fluctuation-adjusted single-photon bounds and their intermediates.
struct SinglePhotonBounds {
  double q1_lower = 0.0;
  double e1_upper = 0.0;
  double qnu_lower = 0.0;
  double y0_lower = 0.0;
  double y0_upper = 0.0;
  BoundStatus status = BoundStatus::kOk;
};

struct KeyRateReport {
  double rate_lower_R = 0.0;          // raw, may be negative
  double rate_clamped = 0.0;          // max(rate_lower_R, 0)
  std::uint64_t key_length_L = 0;     // floor(N * rate_clamped)
  SinglePhotonBounds bounds;
  BoundStatus status = BoundStatus::kOk;
  // inputs echoed for audit
  ProtocolSpec protocol;
  SessionPlan plan;
  MeasuredStats stats;
  std::string note;
};

namespace detail {

inline void require_probability(double v, const char* field) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange,
                std::string(field) + " must lie in [0,1], got " +
                    std::to_string(v));
  }
}

}  // namespace detail

inline SetupParams validate_setup(const SetupParams& raw) {
  detail::require_probability(raw.dark_count_Y0, "dark_count_Y0");
  detail::require_probability(raw.detector_error_e_det, "detector_error_e_det");
  detail::require_probability(raw.receiver_efficiency_eta_bob,
                              "receiver_efficiency_eta_bob");
  detail::require_probability(raw.vacuum_error_e0, "vacuum_error_e0");
  if (!(raw.loss_alpha_db_per_km >= 0.0)) {
    throw Error(ErrorCode::kOutOfRange, "loss_alpha_db_per_km must be >= 0");
  }
  if (!(raw.ec_efficiency_f >= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "ec_efficiency_f must be >= 1");
  }
  return raw;
}

inline ProtocolSpec validate_protocol(const ProtocolSpec& raw) {
  if (!(raw.mu > 0.0)) {
    throw Error(ErrorCode::kOutOfRange, "mu must be > 0");
  }
  if (has_weak_state(raw.family)) {
    if (!(raw.nu > 0.0)) {
      throw Error(ErrorCode::kOutOfRange, "nu must be > 0");
    }
    // mu*nu - nu^2 <= 0 would sink the single-photon bound denominator
    if (!(raw.nu < raw.mu)) {
      throw Error(ErrorCode::kDegenerate, "nu must satisfy nu < mu strictly");
    }
  }
  if (!(raw.frac_signal >= 0.0) || !(raw.frac_weak >= 0.0) ||
      !(raw.frac_vacuum >= 0.0)) {
    throw Error(ErrorCode::kOutOfRange, "state fractions must be nonnegative");
  }
  const double sum = raw.frac_signal + raw.frac_weak + raw.frac_vacuum;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorCode::kOutOfRange,
                "state fractions must sum to 1, got " + std::to_string(sum));
  }
  if (raw.family != Family::kWeakVacuum && raw.frac_vacuum != 0.0) {
    throw Error(ErrorCode::kOutOfRange,
                "frac_vacuum must be 0 unless family is WEAK_VACUUM");
  }
  return raw;
}

inline SessionPlan validate_plan(const SessionPlan& raw) {
  if (!(raw.total_pulses_N >= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "total_pulses_N must be >= 1");
  }
  if (!(raw.u_alpha >= 0.0)) {
    throw Error(ErrorCode::kOutOfRange, "u_alpha must be >= 0");
  }
  return raw;
}

inline MeasuredStats validate_stats(const MeasuredStats& raw) {
  detail::require_probability(raw.gain_signal_Qmu, "gain_signal_Qmu");
  detail::require_probability(raw.qber_signal_Emu, "qber_signal_Emu");
  detail::require_probability(raw.sift_ratio_q, "sift_ratio_q");
  if (raw.gain_weak_Qnu) {
    detail::require_probability(*raw.gain_weak_Qnu, "gain_weak_Qnu");
  }
  if (raw.qber_weak_Enu) {
    detail::require_probability(*raw.qber_weak_Enu, "qber_weak_Enu");
  }
  if (raw.background_Y0) {
    detail::require_probability(*raw.background_Y0, "background_Y0");
  }
  if (raw.background_error_e0) {
    detail::require_probability(*raw.background_error_e0,
                                "background_error_e0");
  }
  return raw;
}

}  // namespace decoyqkd

#endif  // DECOYQKD_MODEL_HPP
