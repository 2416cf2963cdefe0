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

#ifndef DECOYQKD_CONFIG_HPP
#define DECOYQKD_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "decoyqkd/errors.hpp"
#include "decoyqkd/model.hpp"
#include "decoyqkd/planner.hpp"
#include "decoyqkd/version.hpp"

namespace decoyqkd {

using Json = nlohmann::ordered_json;

struct SweepRange {
  std::vector<Family> families;
  double d_start = 0.0;
  double d_end = 0.0;
  double d_step = 1.0;
};

struct Seeds {
  std::uint64_t schedule = 1;
  std::uint64_t session = 2;
};

// One structured document serves all subcommands; optional blocks are
// present only when the subcommand needs them.
struct RunConfig {
  SetupParams setup;
  ProtocolSpec protocol;
  SessionPlan plan;
  double distance_km = 0.0;
  std::optional<MeasuredStats> stats;
  std::optional<GridSpec> grid;
  std::optional<SweepRange> sweep;
  std::optional<Seeds> seeds;
  std::string notes;
};

namespace cfgdetail {

inline const Json& require_key(const Json& json, const char* key) {
  auto it = json.find(key);
  if (it == json.end()) {
    throw Error(ErrorCode::kParseError,
                std::string("missing required key '") + key + "'");
  }
  return *it;
}

inline double number(const Json& json, const char* key) {
  const Json& v = require_key(json, key);
  if (!v.is_number()) {
    throw Error(ErrorCode::kParseError,
                std::string("key '") + key + "' must be a number");
  }
  return v.get<double>();
}

inline double number_or(const Json& json, const char* key, double fallback) {
  auto it = json.find(key);
  if (it == json.end()) return fallback;
  if (!it->is_number()) {
    throw Error(ErrorCode::kParseError,
                std::string("key '") + key + "' must be a number");
  }
  return it->get<double>();
}

inline std::optional<double> opt_number(const Json& json, const char* key) {
  auto it = json.find(key);
  if (it == json.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace cfgdetail

inline SetupParams setup_from_json(const Json& json) {
  SetupParams setup;
  setup.dark_count_Y0 = cfgdetail::number(json, "dark_count_Y0");
  setup.detector_error_e_det = cfgdetail::number(json, "detector_error_e_det");
  setup.receiver_efficiency_eta_bob =
      cfgdetail::number(json, "receiver_efficiency_eta_bob");
  setup.loss_alpha_db_per_km = cfgdetail::number(json, "loss_alpha_db_per_km");
  setup.vacuum_error_e0 = cfgdetail::number_or(json, "vacuum_error_e0", 0.5);
  setup.ec_efficiency_f = cfgdetail::number_or(json, "ec_efficiency_f", 1.22);
  return validate_setup(setup);
}

inline Json setup_to_json(const SetupParams& setup) {
  Json json;
  json["dark_count_Y0"] = setup.dark_count_Y0;
  json["detector_error_e_det"] = setup.detector_error_e_det;
  json["receiver_efficiency_eta_bob"] = setup.receiver_efficiency_eta_bob;
  json["loss_alpha_db_per_km"] = setup.loss_alpha_db_per_km;
  json["vacuum_error_e0"] = setup.vacuum_error_e0;
  json["ec_efficiency_f"] = setup.ec_efficiency_f;
  return json;
}

inline ProtocolSpec protocol_from_json(const Json& json) {
  ProtocolSpec protocol;
  protocol.family = family_from_string(
      cfgdetail::require_key(json, "family").get<std::string>());
  protocol.mu = cfgdetail::number(json, "mu");
  if (has_weak_state(protocol.family)) {
    protocol.nu = cfgdetail::number(json, "nu");
  }
  protocol.frac_signal = cfgdetail::number_or(json, "frac_signal", 1.0);
  protocol.frac_weak = cfgdetail::number_or(json, "frac_weak", 0.0);
  protocol.frac_vacuum = cfgdetail::number_or(json, "frac_vacuum", 0.0);
  return validate_protocol(protocol);
}

inline Json protocol_to_json(const ProtocolSpec& protocol) {
  Json json;
  json["family"] = to_string(protocol.family);
  json["mu"] = protocol.mu;
  if (has_weak_state(protocol.family)) {
    json["nu"] = protocol.nu;
  }
  json["frac_signal"] = protocol.frac_signal;
  json["frac_weak"] = protocol.frac_weak;
  json["frac_vacuum"] = protocol.frac_vacuum;
  return json;
}

inline SessionPlan plan_from_json(const Json& json) {
  SessionPlan plan;
  plan.total_pulses_N = cfgdetail::number(json, "total_pulses_N");
  plan.u_alpha = cfgdetail::number(json, "u_alpha");
  return validate_plan(plan);
}

inline Json plan_to_json(const SessionPlan& plan) {
  Json json;
  json["total_pulses_N"] = plan.total_pulses_N;
  json["u_alpha"] = plan.u_alpha;
  return json;
}

inline MeasuredStats stats_from_json(const Json& json) {
  MeasuredStats stats;
  stats.gain_signal_Qmu = cfgdetail::number(json, "gain_signal_Qmu");
  stats.qber_signal_Emu = cfgdetail::number(json, "qber_signal_Emu");
  stats.gain_weak_Qnu = cfgdetail::opt_number(json, "gain_weak_Qnu");
  stats.qber_weak_Enu = cfgdetail::opt_number(json, "qber_weak_Enu");
  stats.background_Y0 = cfgdetail::opt_number(json, "background_Y0");
  stats.background_error_e0 = cfgdetail::opt_number(json, "background_error_e0");
  stats.sift_ratio_q = cfgdetail::number(json, "sift_ratio_q");
  return validate_stats(stats);
}

inline Json stats_to_json(const MeasuredStats& stats) {
  Json json;
  json["gain_signal_Qmu"] = stats.gain_signal_Qmu;
  json["qber_signal_Emu"] = stats.qber_signal_Emu;
  if (stats.gain_weak_Qnu) json["gain_weak_Qnu"] = *stats.gain_weak_Qnu;
  if (stats.qber_weak_Enu) json["qber_weak_Enu"] = *stats.qber_weak_Enu;
  if (stats.background_Y0) json["background_Y0"] = *stats.background_Y0;
  if (stats.background_error_e0) {
    json["background_error_e0"] = *stats.background_error_e0;
  }
  json["sift_ratio_q"] = stats.sift_ratio_q;
  return json;
}

inline GridSpec grid_from_json(const Json& json) {
  GridSpec grid;
  if (auto it = json.find("mu_range"); it != json.end()) {
    grid.mu_range = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  }
  if (auto it = json.find("nu_range"); it != json.end()) {
    grid.nu_range = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  }
  grid.intensity_step =
      cfgdetail::number_or(json, "intensity_step", grid.intensity_step);
  grid.fraction_step =
      cfgdetail::number_or(json, "fraction_step", grid.fraction_step);
  grid.refine_stages = static_cast<int>(
      cfgdetail::number_or(json, "refine_stages", grid.refine_stages));
  grid.coarse_intensity_step = cfgdetail::number_or(
      json, "coarse_intensity_step", grid.coarse_intensity_step);
  grid.coarse_fraction_step = cfgdetail::number_or(
      json, "coarse_fraction_step", grid.coarse_fraction_step);
  return validate_grid(grid);
}

inline Json grid_to_json(const GridSpec& grid) {
  Json json;
  json["mu_range"] = {grid.mu_range.lo, grid.mu_range.hi};
  json["nu_range"] = {grid.nu_range.lo, grid.nu_range.hi};
  json["intensity_step"] = grid.intensity_step;
  json["fraction_step"] = grid.fraction_step;
  json["refine_stages"] = grid.refine_stages;
  json["coarse_intensity_step"] = grid.coarse_intensity_step;
  json["coarse_fraction_step"] = grid.coarse_fraction_step;
  return json;
}

inline SweepRange sweep_from_json(const Json& json) {
  SweepRange range;
  const Json& families = cfgdetail::require_key(json, "families");
  if (!families.is_array() || families.empty()) {
    throw Error(ErrorCode::kParseError,
                "sweep.families must be a non-empty array");
  }
  for (const auto& name : families) {
    range.families.push_back(family_from_string(name.get<std::string>()));
  }
  range.d_start = cfgdetail::number(json, "d_start");
  range.d_end = cfgdetail::number(json, "d_end");
  range.d_step = cfgdetail::number(json, "d_step");
  return range;
}

inline Json sweep_to_json(const SweepRange& range) {
  Json json;
  Json families = Json::array();
  for (Family family : range.families) families.push_back(to_string(family));
  json["families"] = families;
  json["d_start"] = range.d_start;
  json["d_end"] = range.d_end;
  json["d_step"] = range.d_step;
  return json;
}

inline RunConfig config_from_json(const Json& json) {
  RunConfig config;
  config.setup = setup_from_json(cfgdetail::require_key(json, "setup"));
  config.protocol =
      protocol_from_json(cfgdetail::require_key(json, "protocol"));
  config.plan = plan_from_json(cfgdetail::require_key(json, "plan"));
  config.distance_km = cfgdetail::number_or(json, "distance_km", 0.0);
  if (auto it = json.find("stats"); it != json.end()) {
    config.stats = stats_from_json(*it);
  }
  if (auto it = json.find("grid"); it != json.end()) {
    config.grid = grid_from_json(*it);
  }
  if (auto it = json.find("sweep"); it != json.end()) {
    config.sweep = sweep_from_json(*it);
  }
  if (auto it = json.find("seeds"); it != json.end()) {
    Seeds seeds;
    seeds.schedule = (*it).value("schedule", seeds.schedule);
    seeds.session = (*it).value("session", seeds.session);
    config.seeds = seeds;
  }
  config.notes = json.value("notes", std::string());
  return config;
}

inline Json config_to_json(const RunConfig& config) {
  Json json;
  json["setup"] = setup_to_json(config.setup);
  json["protocol"] = protocol_to_json(config.protocol);
  json["plan"] = plan_to_json(config.plan);
  json["distance_km"] = config.distance_km;
  if (config.stats) json["stats"] = stats_to_json(*config.stats);
  if (config.grid) json["grid"] = grid_to_json(*config.grid);
  if (config.sweep) json["sweep"] = sweep_to_json(*config.sweep);
  if (config.seeds) {
    Json seeds;
    seeds["schedule"] = config.seeds->schedule;
    seeds["session"] = config.seeds->session;
    json["seeds"] = seeds;
  }
  if (!config.notes.empty()) json["notes"] = config.notes;
  return json;
}

inline std::string serialize_config(const RunConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

inline RunConfig parse_config(const std::string& text) {
  Json json;
  try {
    json = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return config_from_json(json);
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kParseError,
                "cannot open config file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

// FNV-1a over the canonical serialization; recorded in reports so a rerun
// can be matched to its exact inputs.
inline std::uint64_t config_hash(const RunConfig& config) {
  const std::string text = serialize_config(config);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline Json bounds_to_json(const SinglePhotonBounds& bounds) {
  Json json;
  json["q1_lower"] = bounds.q1_lower;
  json["e1_upper"] = bounds.e1_upper;
  json["qnu_lower"] = bounds.qnu_lower;
  json["y0_lower"] = bounds.y0_lower;
  json["y0_upper"] = bounds.y0_upper;
  return json;
}

inline Json report_to_json(const KeyRateReport& report) {
  Json json;
  json["rate_lower_R"] = report.rate_lower_R;
  json["rate_clamped"] = report.rate_clamped;
  json["key_length_L"] = report.key_length_L;
  json["secure"] = report.status == BoundStatus::kOk && report.rate_lower_R > 0.0;
  json["status"] =
      report.status == BoundStatus::kOk ? "OK" : "NO_SECURE_KEY";
  json["bounds"] = bounds_to_json(report.bounds);
  json["protocol"] = protocol_to_json(report.protocol);
  json["plan"] = plan_to_json(report.plan);
  json["stats"] = stats_to_json(report.stats);
  if (!report.note.empty()) json["note"] = report.note;
  return json;
}

// write-then-rename so readers never observe a partial file
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kParseError,
                  "cannot open output file " + tmp.string());
    }
    out << contents;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace decoyqkd

#endif  // DECOYQKD_CONFIG_HPP
