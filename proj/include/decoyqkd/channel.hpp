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

#ifndef DECOYQKD_CHANNEL_HPP
#define DECOYQKD_CHANNEL_HPP

#include <cmath>

#include "decoyqkd/errors.hpp"
#include "decoyqkd/model.hpp"

namespace decoyqkd {

// Overall transmittance (receiver efficiency included) at a distance.
struct ChannelPoint {
  double distance_km = 0.0;
  double eta = 1.0;
};

struct GainQber {
  double gain_Q = 0.0;
  double qber_E = 0.0;
};

// eta = eta_bob * 10^(-alpha*l/10). The loss coefficient is quoted in
// dB/km, so attenuation is base-10.
inline ChannelPoint transmittance(const SetupParams& setup,
                                  double distance_km) {
  if (!(distance_km >= 0.0)) {
    throw Error(ErrorCode::kOutOfRange, "distance_km must be >= 0");
  }
  const double eta =
      setup.receiver_efficiency_eta_bob *
      std::pow(10.0, -setup.loss_alpha_db_per_km * distance_km / 10.0);
  return ChannelPoint{distance_km, eta};
}

// Expected gain and QBER of a state with mean photon number mu:
//   Q = Y0 + 1 - e^(-eta*mu)
//   E = (e0*Y0 + e_det*(1 - e^(-eta*mu))) / Q
// Q can exceed 1 only when Y0 > e^(-eta*mu); it is clamped to 1 there.
inline GainQber expected_stats(const SetupParams& setup,
                               const ChannelPoint& point,
                               double intensity_mu) {
  if (!(intensity_mu >= 0.0)) {
    throw Error(ErrorCode::kOutOfRange, "intensity_mu must be >= 0");
  }
  const double signal = 1.0 - std::exp(-point.eta * intensity_mu);
  double gain = setup.dark_count_Y0 + signal;
  if (gain > 1.0) gain = 1.0;
  if (gain <= 0.0) {
    // only when Y0 = 0 and eta*mu = 0; E = e0 by convention
    return GainQber{0.0, setup.vacuum_error_e0};
  }
  const double qber = (setup.vacuum_error_e0 * setup.dark_count_Y0 +
                       setup.detector_error_e_det * signal) /
                      gain;
  return GainQber{gain, qber};
}

// Composes expected_stats across the protocol's states. Sifting keeps the
// basis-matched half of the signal fraction; the infinite-decoy limit uses
// q = 1/2 by convention.
inline MeasuredStats expected_measured(const SetupParams& setup,
                                       const ChannelPoint& point,
                                       const ProtocolSpec& protocol) {
  MeasuredStats stats;
  const GainQber signal = expected_stats(setup, point, protocol.mu);
  stats.gain_signal_Qmu = signal.gain_Q;
  stats.qber_signal_Emu = signal.qber_E;
  if (has_weak_state(protocol.family)) {
    const GainQber weak = expected_stats(setup, point, protocol.nu);
    stats.gain_weak_Qnu = weak.gain_Q;
    stats.qber_weak_Enu = weak.qber_E;
  }
  if (protocol.family == Family::kWeakVacuum) {
    const GainQber vac = expected_stats(setup, point, 0.0);
    stats.background_Y0 = vac.gain_Q;
    stats.background_error_e0 = vac.qber_E;
  }
  stats.sift_ratio_q = protocol.family == Family::kInfiniteDecoy
                           ? 0.5
                           : protocol.frac_signal / 2.0;
  return stats;
}

}  // namespace decoyqkd

#endif  // DECOYQKD_CHANNEL_HPP
