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

#ifndef DECOYQKD_MONTECARLO_HPP
#define DECOYQKD_MONTECARLO_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "decoyqkd/channel.hpp"
#include "decoyqkd/errors.hpp"
#include "decoyqkd/model.hpp"

namespace decoyqkd {

enum class StateLabel : std::uint8_t {
  kSignal = 0,
  kWeak = 1,
  kVacuum = 2,
};

// Per-pulse sender-side assignments, reproducible from the seed.
// intensity[] maps label -> mean photon number (vacuum is 0).
struct Schedule {
  std::vector<StateLabel> labels;
  std::vector<std::uint8_t> bases;  // 0/1
  std::vector<std::uint8_t> bits;   // 0/1
  std::array<double, 3> intensity{0.0, 0.0, 0.0};
  std::uint64_t seed = 0;

  std::size_t size() const { return labels.size(); }
};

// Per-pulse receiver outcome. The measured bit and double-click marker are
// meaningful only when kClick is set. Double-click bits are uniformly
// random.
struct Event {
  static constexpr std::uint8_t kClick = 1;
  static constexpr std::uint8_t kBit = 2;
  static constexpr std::uint8_t kDouble = 4;
  static constexpr std::uint8_t kBobBasis = 8;

  std::uint8_t flags = 0;

  bool clicked() const { return flags & kClick; }
  int measured_bit() const { return (flags & kBit) ? 1 : 0; }
  bool was_double() const { return flags & kDouble; }
  int bob_basis() const { return (flags & kBobBasis) ? 1 : 0; }
};

struct EventLog {
  std::vector<Event> events;
  std::uint64_t seed = 0;

  std::size_t size() const { return events.size(); }
};

namespace mcdetail {

// Counter-based per-pulse randomness: the stream for pulse i is a
// splitmix64 sequence keyed by (seed, i), so chunked execution is
// bit-identical to serial regardless of chunk boundaries.
class PulseRng {
 public:
  PulseRng(std::uint64_t seed, std::uint64_t pulse_index)
      : state_(mix(seed ^ 0x9e3779b97f4a7c15ULL, pulse_index)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  int next_bit() { return static_cast<int>(next_u64() >> 63); }

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace mcdetail

// Independently assigns each pulse a state per the protocol fractions and
// uniform basis/key bits. Deterministic for a fixed seed.
inline Schedule generate_schedule(const SessionPlan& plan,
                                  const ProtocolSpec& protocol,
                                  std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(plan.total_pulses_N);
  if (n < 1) {
    throw Error(ErrorCode::kOutOfRange, "schedule needs at least one pulse");
  }
  Schedule schedule;
  schedule.seed = seed;
  schedule.labels.resize(n);
  schedule.bases.resize(n);
  schedule.bits.resize(n);
  schedule.intensity = {protocol.mu,
                        has_weak_state(protocol.family) ? protocol.nu : 0.0,
                        0.0};
  const double threshold_signal = protocol.frac_signal;
  const double threshold_weak = protocol.frac_signal + protocol.frac_weak;
  for (std::size_t i = 0; i < n; ++i) {
    mcdetail::PulseRng rng(seed, i);
    const double u = rng.next_unit();
    schedule.labels[i] = u < threshold_signal ? StateLabel::kSignal
                         : u < threshold_weak ? StateLabel::kWeak
                                              : StateLabel::kVacuum;
    schedule.bases[i] = static_cast<std::uint8_t>(rng.next_bit());
    schedule.bits[i] = static_cast<std::uint8_t>(rng.next_bit());
  }
  return schedule;
}

// Fills events for pulse indices [begin, end) of a two-detector click
// model. Per pulse of intensity mu_i:
//   - a signal click fires with probability 1 - e^(-eta*mu_i); it lands on
//     the wrong detector with probability e_det when the receiver basis
//     matches, and on a uniformly random detector when it mismatches;
//   - each detector dark-clicks independently with probability Y0/2;
//   - both-detector events are marked double with a uniformly random
//     measured bit.
// Chunk-invariant: every pulse draws from its own (seed, index) stream.
inline void simulate_session_range(const SetupParams& setup,
                                   const ChannelPoint& point,
                                   const Schedule& schedule,
                                   std::uint64_t seed, std::size_t begin,
                                   std::size_t end, EventLog& log) {
  const std::array<double, 3> p_click = {
      1.0 - std::exp(-point.eta * schedule.intensity[0]),
      1.0 - std::exp(-point.eta * schedule.intensity[1]),
      1.0 - std::exp(-point.eta * schedule.intensity[2]),
  };
  const double half_dark = setup.dark_count_Y0 / 2.0;
  const double e_det = setup.detector_error_e_det;

  for (std::size_t i = begin; i < end; ++i) {
    mcdetail::PulseRng rng(seed, i);
    const int bob_basis = rng.next_bit();
    bool det[2] = {false, false};
    if (rng.next_unit() < p_click[static_cast<int>(schedule.labels[i])]) {
      int bit;
      if (bob_basis == schedule.bases[i]) {
        bit = schedule.bits[i] ^ (rng.next_unit() < e_det ? 1 : 0);
      } else {
        rng.next_unit();  // keep the stream layout fixed across branches
        bit = rng.next_bit();
      }
      det[bit] = true;
    } else {
      rng.next_unit();
      rng.next_bit();
    }
    det[0] = det[0] || rng.next_unit() < half_dark;
    det[1] = det[1] || rng.next_unit() < half_dark;
    const int random_bit = rng.next_bit();

    Event event;
    event.flags = static_cast<std::uint8_t>(bob_basis ? Event::kBobBasis : 0);
    if (det[0] || det[1]) {
      event.flags |= Event::kClick;
      int measured;
      if (det[0] && det[1]) {
        event.flags |= Event::kDouble;
        measured = random_bit;
      } else {
        measured = det[1] ? 1 : 0;
      }
      if (measured) event.flags |= Event::kBit;
    }
    log.events[i] = event;
  }
}

inline EventLog simulate_session(const SetupParams& setup,
                                 const ChannelPoint& point,
                                 const Schedule& schedule,
                                 std::uint64_t seed) {
  EventLog log;
  log.seed = seed;
  log.events.resize(schedule.size());
  simulate_session_range(setup, point, schedule, seed, 0, schedule.size(),
                         log);
  return log;
}

// Commutative per-chunk tallies; merging chunks in any grouping yields the
// same totals.
struct Tally {
  std::array<std::uint64_t, 3> pulses{};
  std::array<std::uint64_t, 3> clicks{};
  std::array<std::uint64_t, 3> matched_clicks{};
  std::array<std::uint64_t, 3> matched_errors{};
  std::uint64_t matched_signal_pulses = 0;
  std::uint64_t double_clicks = 0;
  std::uint64_t double_click_ones = 0;

  Tally& merge(const Tally& other) {
    for (int s = 0; s < 3; ++s) {
      pulses[s] += other.pulses[s];
      clicks[s] += other.clicks[s];
      matched_clicks[s] += other.matched_clicks[s];
      matched_errors[s] += other.matched_errors[s];
    }
    matched_signal_pulses += other.matched_signal_pulses;
    double_clicks += other.double_clicks;
    double_click_ones += other.double_click_ones;
    return *this;
  }
};

inline Tally tally_range(const Schedule& schedule, const EventLog& events,
                         std::size_t begin, std::size_t end) {
  Tally tally;
  for (std::size_t i = begin; i < end; ++i) {
    const int s = static_cast<int>(schedule.labels[i]);
    const Event& event = events.events[i];
    const bool matched = event.bob_basis() == schedule.bases[i];
    ++tally.pulses[s];
    if (s == static_cast<int>(StateLabel::kSignal) && matched) {
      ++tally.matched_signal_pulses;
    }
    if (!event.clicked()) continue;
    ++tally.clicks[s];
    if (event.was_double()) {
      ++tally.double_clicks;
      tally.double_click_ones += event.measured_bit();
    }
    if (matched) {
      ++tally.matched_clicks[s];
      if (event.measured_bit() != schedule.bits[i]) {
        ++tally.matched_errors[s];
      }
    }
  }
  return tally;
}

// Measurement bookkeeping: per-state gain = clicks/pulses, QBER over
// basis-matched clicks, background from vacuum pulses, and
// q = (basis-matched signal pulses)/N. States with zero matched clicks get
// the e0 convention for their QBER.
inline MeasuredStats stats_from_tally(const Tally& tally, double vacuum_e0,
                                      bool has_weak, bool has_vacuum) {
  auto ratio = [](std::uint64_t num, std::uint64_t den, double fallback) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den)
                   : fallback;
  };
  const int sig = static_cast<int>(StateLabel::kSignal);
  const int weak = static_cast<int>(StateLabel::kWeak);
  const int vac = static_cast<int>(StateLabel::kVacuum);

  MeasuredStats stats;
  const std::uint64_t total =
      tally.pulses[sig] + tally.pulses[weak] + tally.pulses[vac];
  stats.gain_signal_Qmu = ratio(tally.clicks[sig], tally.pulses[sig], 0.0);
  stats.qber_signal_Emu =
      ratio(tally.matched_errors[sig], tally.matched_clicks[sig], vacuum_e0);
  if (has_weak) {
    stats.gain_weak_Qnu = ratio(tally.clicks[weak], tally.pulses[weak], 0.0);
    stats.qber_weak_Enu =
        ratio(tally.matched_errors[weak], tally.matched_clicks[weak], vacuum_e0);
  }
  if (has_vacuum) {
    stats.background_Y0 = ratio(tally.clicks[vac], tally.pulses[vac], 0.0);
    stats.background_error_e0 =
        ratio(tally.matched_errors[vac], tally.matched_clicks[vac], vacuum_e0);
  }
  stats.sift_ratio_q =
      ratio(tally.matched_signal_pulses, total, 0.0);
  return stats;
}

inline MeasuredStats accumulate(const Schedule& schedule,
                                const EventLog& events,
                                double vacuum_e0 = 0.5) {
  if (schedule.size() != events.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "schedule and event log differ in length");
  }
  const Tally tally = tally_range(schedule, events, 0, schedule.size());
  const bool has_weak = schedule.intensity[1] > 0.0;
  const bool has_vacuum =
      tally.pulses[static_cast<int>(StateLabel::kVacuum)] > 0;
  return stats_from_tally(tally, vacuum_e0, has_weak, has_vacuum);
}

}  // namespace decoyqkd

#endif  // DECOYQKD_MONTECARLO_HPP
