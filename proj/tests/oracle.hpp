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

// Test-only reference pipeline. Every step is written out term by term in
// long double, independent of the library's code paths, so the two can
// check each other.

#ifndef DECOYQKD_TESTS_ORACLE_HPP
#define DECOYQKD_TESTS_ORACLE_HPP

#include <cmath>

namespace oracle {

inline long double entropy(long double x) {
  if (x <= 0.0L || x >= 1.0L) return 0.0L;
  return -x * std::log2(x) - (1.0L - x) * std::log2(1.0L - x);
}

inline long double fluct_lower(long double value, long double trials,
                               long double u_alpha) {
  const long double lower =
      value * (1.0L - u_alpha / std::sqrt(trials * value));
  return lower > 0.0L ? lower : 0.0L;
}

inline long double fluct_upper(long double value, long double trials,
                               long double u_alpha) {
  return value * (1.0L + u_alpha / std::sqrt(trials * value));
}

struct OneDecoyResult {
  long double qnu_lower;
  long double q1_lower;
  long double e1_upper;
  long double rate;
};

inline OneDecoyResult one_decoy(long double mu, long double nu,
                                long double q_mu, long double e_mu,
                                long double q_nu, long double q,
                                long double trials_nu, long double u_alpha,
                                long double f, long double e0) {
  OneDecoyResult r;
  r.qnu_lower = fluct_lower(q_nu, trials_nu, u_alpha);
  const long double term1 = r.qnu_lower * std::exp(nu);
  const long double term2 = q_mu * std::exp(mu) * nu * nu / (mu * mu);
  const long double term3 = e_mu * q_mu * std::exp(mu) * (mu * mu - nu * nu) /
                            (e0 * mu * mu);
  const long double prefactor =
      mu * mu * std::exp(-mu) / (mu * nu - nu * nu);
  r.q1_lower = prefactor * (term1 - term2 - term3);
  r.e1_upper = e_mu * q_mu / r.q1_lower;
  if (r.q1_lower > 0.0L && r.e1_upper <= 0.5L) {
    r.rate = q * (-q_mu * f * entropy(e_mu) +
                  r.q1_lower * (1.0L - entropy(r.e1_upper)));
  } else {
    r.rate = q * (-q_mu * f * entropy(e_mu));
  }
  return r;
}

struct WeakVacuumResult {
  long double qnu_lower;
  long double y0_lower;
  long double y0_upper;
  long double q1_lower;
  long double e1_upper;
  long double rate;
};

inline WeakVacuumResult weak_vacuum(long double mu, long double nu,
                                    long double q_mu, long double e_mu,
                                    long double q_nu, long double y0,
                                    long double e0_measured, long double q,
                                    long double trials_nu,
                                    long double trials_vac,
                                    long double u_alpha, long double f) {
  WeakVacuumResult r;
  r.qnu_lower = fluct_lower(q_nu, trials_nu, u_alpha);
  r.y0_lower = fluct_lower(y0, trials_vac, u_alpha);
  r.y0_upper = fluct_upper(y0, trials_vac, u_alpha);
  const long double term1 = r.qnu_lower * std::exp(nu);
  const long double term2 = q_mu * std::exp(mu) * nu * nu / (mu * mu);
  const long double term3 = r.y0_upper * (mu * mu - nu * nu) / (mu * mu);
  const long double prefactor =
      mu * mu * std::exp(-mu) / (mu * nu - nu * nu);
  r.q1_lower = prefactor * (term1 - term2 - term3);
  r.e1_upper =
      (e_mu * q_mu - e0_measured * r.y0_lower * std::exp(-mu)) / r.q1_lower;
  if (r.e1_upper < 0.0L) r.e1_upper = 0.0L;
  if (r.q1_lower > 0.0L && r.e1_upper <= 0.5L) {
    r.rate = q * (-q_mu * f * entropy(e_mu) +
                  r.q1_lower * (1.0L - entropy(r.e1_upper)));
  } else {
    r.rate = q * (-q_mu * f * entropy(e_mu));
  }
  return r;
}

// channel expectation, written independently of channel.hpp
struct ChannelExpectation {
  long double gain;
  long double qber;
};

inline ChannelExpectation channel(long double y0, long double e_det,
                                  long double eta_bob, long double alpha_db,
                                  long double distance, long double mu,
                                  long double e0) {
  const long double eta =
      eta_bob * std::pow(10.0L, -alpha_db * distance / 10.0L);
  const long double signal = 1.0L - std::exp(-eta * mu);
  ChannelExpectation c;
  c.gain = y0 + signal;
  c.qber = (e0 * y0 + e_det * signal) / c.gain;
  return c;
}

inline long double infinite_decoy_rate(long double y0, long double e_det,
                                       long double eta_bob,
                                       long double alpha_db,
                                       long double distance, long double mu,
                                       long double f, long double e0) {
  const long double eta =
      eta_bob * std::pow(10.0L, -alpha_db * distance / 10.0L);
  const ChannelExpectation sig =
      channel(y0, e_det, eta_bob, alpha_db, distance, mu, e0);
  const long double y1 = y0 + eta - y0 * eta;
  const long double e1 = (e0 * y0 + e_det * eta) / y1;
  const long double q1 = y1 * mu * std::exp(-mu);
  return 0.5L * (-sig.gain * f * entropy(sig.qber) +
                 q1 * (1.0L - entropy(e1)));
}

}  // namespace oracle

#endif  // DECOYQKD_TESTS_ORACLE_HPP
