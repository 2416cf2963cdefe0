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

#include "decoyqkd/model.hpp"

using namespace decoyqkd;

namespace {

SetupParams one_decoy_setup() {
  SetupParams setup;
  setup.dark_count_Y0 = 2.11e-5;
  setup.detector_error_e_det = 8.27e-3;
  setup.receiver_efficiency_eta_bob = 2.27e-2;
  setup.loss_alpha_db_per_km = 0.21;
  return setup;
}

}  // namespace

TEST_CASE("validate_setup accepts the measured device parameters") {
  CHECK_NOTHROW(validate_setup(one_decoy_setup()));
}

TEST_CASE("validate_setup rejects out-of-range fields by name") {
  SetupParams setup = one_decoy_setup();
  setup.dark_count_Y0 = -1e-6;
  try {
    validate_setup(setup);
    FAIL("expected OUT_OF_RANGE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfRange);
    CHECK(std::string(e.what()).find("dark_count_Y0") != std::string::npos);
  }

  setup = one_decoy_setup();
  setup.ec_efficiency_f = 0.9;
  CHECK_THROWS_AS(validate_setup(setup), Error);
}

TEST_CASE("validate_protocol accepts both experiment operating points") {
  ProtocolSpec one_decoy{Family::kOneDecoy, 0.80, 0.120, 0.9, 0.1, 0.0};
  CHECK_NOTHROW(validate_protocol(one_decoy));

  ProtocolSpec weak_vacuum{Family::kWeakVacuum, 0.55, 0.152,
                           0.635, 0.203, 0.162};
  CHECK_NOTHROW(validate_protocol(weak_vacuum));
}

TEST_CASE("validate_protocol flags nu >= mu as degenerate") {
  ProtocolSpec protocol{Family::kOneDecoy, 0.5, 0.5, 0.9, 0.1, 0.0};
  try {
    validate_protocol(protocol);
    FAIL("expected DEGENERATE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerate);
  }
}

TEST_CASE("validate_protocol rejects bad fractions") {
  ProtocolSpec protocol{Family::kOneDecoy, 0.8, 0.12, 0.9, 0.2, 0.0};
  CHECK_THROWS_AS(validate_protocol(protocol), Error);

  protocol = {Family::kOneDecoy, 0.8, 0.12, 0.8, 0.1, 0.1};
  CHECK_THROWS_AS(validate_protocol(protocol), Error);  // vacuum without WV
}

TEST_CASE("validation is idempotent") {
  const ProtocolSpec protocol =
      validate_protocol({Family::kWeakVacuum, 0.55, 0.152, 0.635, 0.203, 0.162});
  const ProtocolSpec twice = validate_protocol(protocol);
  CHECK(twice.mu == protocol.mu);
  CHECK(twice.frac_vacuum == protocol.frac_vacuum);

  const SetupParams setup = validate_setup(one_decoy_setup());
  CHECK_NOTHROW(validate_setup(setup));
}

TEST_CASE("accepted fractions sum to one") {
  const ProtocolSpec protocol =
      validate_protocol({Family::kWeakVacuum, 0.55, 0.152, 0.635, 0.203, 0.162});
  CHECK(std::abs(protocol.frac_signal + protocol.frac_weak +
                 protocol.frac_vacuum - 1.0) < 1e-12);
}

TEST_CASE("validate_plan and validate_stats guard ranges") {
  CHECK_THROWS_AS(validate_plan({0.0, 10.0}), Error);
  CHECK_THROWS_AS(validate_plan({1e8, -1.0}), Error);
  CHECK_NOTHROW(validate_plan({1.05e8, 10.0}));

  MeasuredStats stats;
  stats.gain_signal_Qmu = 1.5;
  CHECK_THROWS_AS(validate_stats(stats), Error);
}
