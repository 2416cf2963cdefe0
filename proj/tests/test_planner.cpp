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

#include <catch_amalgamated.hpp>

#include "decoyqkd/planner.hpp"

using namespace decoyqkd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SetupParams row1() {
  return SetupParams{2.11e-5, 8.27e-3, 2.27e-2, 0.21};
}

SetupParams row2() {
  return SetupParams{6.14e-5, 1.38e-2, 5.82e-2, 0.21};
}

SessionPlan plan() { return SessionPlan{1.05e8, 10.0}; }

// coarse settings for the smoke tests; final steps stay at the defaults
GridSpec quick_grid() {
  GridSpec grid;
  grid.intensity_step = 0.01;
  grid.fraction_step = 0.05;
  grid.coarse_intensity_step = 0.05;
  grid.coarse_fraction_step = 0.1;
  return grid;
}

double analyze_rate(const SetupParams& setup, double distance_km,
                    const ProtocolSpec& protocol, const SessionPlan& p) {
  const ChannelPoint point = transmittance(setup, distance_km);
  const MeasuredStats stats = expected_measured(setup, point, protocol);
  return analyze(protocol, p, stats, analysis_options(setup)).rate_lower_R;
}

}  // namespace

TEST_CASE("validate_grid guards steps and ranges") {
  CHECK_NOTHROW(validate_grid(GridSpec{}));

  GridSpec grid;
  grid.intensity_step = 0.0;
  CHECK_THROWS_AS(validate_grid(grid), Error);

  grid = GridSpec{};
  grid.mu_range = {0.5, 0.2};
  CHECK_THROWS_AS(validate_grid(grid), Error);

  grid = GridSpec{};
  grid.nu_range = {0.0, 0.5};
  CHECK_THROWS_AS(validate_grid(grid), Error);

  grid = GridSpec{};
  grid.refine_stages = 0;
  CHECK_THROWS_AS(validate_grid(grid), Error);
}

TEST_CASE("grid_points covers the interval without duplicating the end") {
  const auto points = detail::grid_points(0.1, 0.3, 0.05);
  REQUIRE(points.size() == 5);
  CHECK(points.front() == 0.1);
  CHECK(points.back() == 0.3);

  // an interval that the step does not divide still ends exactly at hi
  const auto ragged = detail::grid_points(0.0, 0.07, 0.02);
  CHECK(ragged.back() == 0.07);
  for (std::size_t i = 1; i < ragged.size(); ++i) {
    CHECK(ragged[i] > ragged[i - 1]);
  }
}

TEST_CASE("candidate tie-break is a strict total preference") {
  using detail::Candidate;
  using detail::better;
  const Candidate base{1e-4, 0.5, 0.1, 0.9, 0.1};
  CHECK(better(Candidate{2e-4, 0.9, 0.9, 0.1, 0.9}, base));
  CHECK(better(Candidate{1e-4, 0.4, 0.9, 0.1, 0.9}, base));
  CHECK(better(Candidate{1e-4, 0.5, 0.05, 0.1, 0.9}, base));
  CHECK(better(Candidate{1e-4, 0.5, 0.1, 0.95, 0.05}, base));
  CHECK_FALSE(better(base, base));
  CHECK_FALSE(better(Candidate{1e-4, 0.6, 0.1, 0.9, 0.1}, base));
}

TEST_CASE("one-decoy fast path agrees with the canonical pipeline") {
  const SetupParams setup = row1();
  const ChannelPoint point = transmittance(setup, 15.0);
  const detail::RateEvaluator eval(setup, point, plan());

  for (double mu : {0.2, 0.5, 0.8}) {
    for (double nu : {0.05, 0.12, 0.175}) {
      for (double fs : {0.5, 0.9}) {
        const auto mu_table = detail::intensity_table(setup, point, {mu});
        const auto nu_table = detail::intensity_table(setup, point, {nu});
        const double fast = eval.one_decoy(mu_table[0], nu_table[0], fs);
        const ProtocolSpec protocol{Family::kOneDecoy, mu, nu,
                                    fs, 1.0 - fs, 0.0};
        const double canonical = analyze_rate(setup, 15.0, protocol, plan());
        CHECK_THAT(fast, WithinRel(canonical, 1e-12));
      }
    }
  }
}

TEST_CASE("weak+vacuum fast path agrees with the canonical pipeline") {
  const SetupParams setup = row2();
  const ChannelPoint point = transmittance(setup, 60.0);
  const detail::RateEvaluator eval(setup, point, plan());

  for (double mu : {0.4, 0.55}) {
    for (double nu : {0.1, 0.152}) {
      const auto mu_table = detail::intensity_table(setup, point, {mu});
      const auto nu_table = detail::intensity_table(setup, point, {nu});
      for (double fs : {0.5, 0.635}) {
        for (double fw : {0.1, 0.203}) {
          const double fast =
              eval.weak_vacuum(mu_table[0], nu_table[0], fs, fw);
          const ProtocolSpec protocol{Family::kWeakVacuum, mu, nu,
                                      fs, fw, 1.0 - fs - fw};
          const double canonical = analyze_rate(setup, 60.0, protocol, plan());
          CHECK_THAT(fast, WithinRel(canonical, 1e-12));
        }
      }
    }
  }
}

TEST_CASE("no-decoy fast path agrees with the canonical pipeline") {
  const SetupParams setup = row1();
  const ChannelPoint point = transmittance(setup, 5.0);
  const detail::RateEvaluator eval(setup, point, plan());
  for (double mu : {0.05, 0.1, 0.3}) {
    const auto table = detail::intensity_table(setup, point, {mu});
    const ProtocolSpec protocol{Family::kNoDecoy, mu, 0.0, 1.0, 0.0, 0.0};
    CHECK_THAT(eval.no_decoy(table[0]),
               WithinRel(analyze_rate(setup, 5.0, protocol, plan()), 1e-12));
  }
}

TEST_CASE("optimize finds a secure one-decoy point on the short link") {
  const OptimizeResult result =
      optimize(row1(), 15.0, Family::kOneDecoy, plan(), quick_grid());
  CHECK(result.secure);
  CHECK(result.rate_R > 6.0e-4);
  CHECK(result.protocol.nu < result.protocol.mu);
  CHECK_THAT(result.protocol.frac_signal + result.protocol.frac_weak,
             WithinAbs(1.0, 1e-12));
  // reported rate is exactly the canonical pipeline's value
  CHECK(result.rate_R ==
        analyze_rate(row1(), 15.0, result.protocol, plan()));
}

TEST_CASE("optimize finds a secure weak+vacuum point on the long link") {
  const OptimizeResult result =
      optimize(row2(), 60.0, Family::kWeakVacuum, plan(), quick_grid());
  CHECK(result.secure);
  CHECK(result.rate_R > 2.9e-5);
  CHECK(result.protocol.frac_vacuum > 0.0);
  CHECK(result.rate_R ==
        analyze_rate(row2(), 60.0, result.protocol, plan()));
}

TEST_CASE("refinement never loses to the coarse pass") {
  GridSpec coarse_only = quick_grid();
  coarse_only.refine_stages = 1;
  coarse_only.intensity_step = coarse_only.coarse_intensity_step;
  coarse_only.fraction_step = coarse_only.coarse_fraction_step;
  const double coarse =
      optimize(row1(), 15.0, Family::kOneDecoy, plan(), coarse_only).rate_R;
  const double refined =
      optimize(row1(), 15.0, Family::kOneDecoy, plan(), quick_grid()).rate_R;
  CHECK(refined >= coarse);
}

TEST_CASE("optimize is deterministic") {
  const OptimizeResult a =
      optimize(row2(), 40.0, Family::kOneDecoy, plan(), quick_grid());
  const OptimizeResult b =
      optimize(row2(), 40.0, Family::kOneDecoy, plan(), quick_grid());
  CHECK(a.rate_R == b.rate_R);
  CHECK(a.protocol.mu == b.protocol.mu);
  CHECK(a.protocol.nu == b.protocol.nu);
  CHECK(a.protocol.frac_signal == b.protocol.frac_signal);
}

TEST_CASE("no-decoy cannot reach 15 km but infinite decoy can") {
  GridSpec grid = quick_grid();
  const OptimizeResult none =
      optimize(row1(), 15.0, Family::kNoDecoy, plan(), grid);
  CHECK_FALSE(none.secure);
  CHECK(none.rate_R <= 0.0);

  const OptimizeResult infinite =
      optimize(row1(), 15.0, Family::kInfiniteDecoy, plan(), grid);
  CHECK(infinite.secure);
  CHECK(infinite.rate_R > 1.41e-3);  // at least the mu = 0.8 benchmark
  CHECK(infinite.protocol.frac_signal == 1.0);
}

TEST_CASE("sweep emits one point per step including both ends") {
  const auto points = sweep(row1(), Family::kInfiniteDecoy, plan(),
                            0.0, 10.0, 5.0, quick_grid());
  REQUIRE(points.size() == 3);
  CHECK(points[0].distance_km == 0.0);
  CHECK_THAT(points[1].distance_km, WithinAbs(5.0, 1e-9));
  CHECK_THAT(points[2].distance_km, WithinAbs(10.0, 1e-9));
  CHECK(points[0].best_rate_R > points[1].best_rate_R);
  CHECK(points[1].best_rate_R > points[2].best_rate_R);
}

TEST_CASE("sweep with a step larger than the range keeps the start point") {
  const auto points = sweep(row1(), Family::kInfiniteDecoy, plan(),
                            10.0, 12.0, 5.0, quick_grid());
  REQUIRE(points.size() == 1);
  CHECK(points[0].distance_km == 10.0);
}

TEST_CASE("sweep rejects empty or backwards ranges") {
  CHECK_THROWS_AS(
      sweep(row1(), Family::kNoDecoy, plan(), 10.0, 10.0, 1.0, quick_grid()),
      Error);
  CHECK_THROWS_AS(
      sweep(row1(), Family::kNoDecoy, plan(), -1.0, 10.0, 1.0, quick_grid()),
      Error);
  CHECK_THROWS_AS(
      sweep(row1(), Family::kNoDecoy, plan(), 0.0, 10.0, 0.0, quick_grid()),
      Error);
}

TEST_CASE("max_secure_distance brackets the infinite-decoy cut-off") {
  GridSpec grid = quick_grid();
  const double cutoff =
      max_secure_distance(row1(), Family::kInfiniteDecoy, plan(), grid);
  CHECK(cutoff > 85.0);
  CHECK(cutoff < 95.0);
  // rate flips sign across the reported edge
  CHECK(optimize(row1(), cutoff, Family::kInfiniteDecoy, plan(), grid).rate_R >
        0.0);
  CHECK(optimize(row1(), cutoff + 0.02, Family::kInfiniteDecoy, plan(), grid)
            .rate_R <= 0.0);
}

TEST_CASE("max_secure_distance reports a dead link as ZERO_RANGE") {
  SetupParams broken = row1();
  broken.detector_error_e_det = 0.3;
  try {
    max_secure_distance(broken, Family::kNoDecoy, plan(), quick_grid());
    FAIL("expected ZERO_RANGE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroRange);
  }
}
