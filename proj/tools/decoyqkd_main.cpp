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

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "decoyqkd/config.hpp"
#include "decoyqkd/montecarlo.hpp"
#include "decoyqkd/planner.hpp"
#include "decoyqkd/security.hpp"
#include "decoyqkd/version.hpp"

namespace {

using namespace decoyqkd;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

const char* kWeakVacuumNote =
    "weak+vacuum rate recomputed from rounded per-state statistics at the "
    "configured u_alpha; summary rates derived from unrounded raw counts "
    "can differ noticeably";

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  int threads = 0;
  std::optional<std::int64_t> seed_override;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration (JSON)")
      ->required();
  cmd->add_option("--out", args.out_path, "machine-readable output file");
  cmd->add_option("--threads", args.threads, "worker threads (0 = auto)");
  cmd->add_option("--seed-override", args.seed_override,
                  "replace the config's seeds with this value");
}

Json envelope(const RunConfig& config, const std::string& command) {
  Json json;
  json["toolkit_version"] = kVersion;
  json["command"] = command;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  json["config_hash"] = hash;
  return json;
}

void emit(const Json& json, const std::string& out_path) {
  if (!out_path.empty()) {
    write_file_atomic(out_path, json.dump(2) + "\n");
  }
}

void print_report(const KeyRateReport& report) {
  std::printf("family           %s\n", to_string(report.protocol.family));
  std::printf("rate_lower_R     %.6e%s\n", report.rate_lower_R,
              report.rate_lower_R > 0.0 ? "" : "  (no secure key)");
  std::printf("key_length_L     %llu bits\n",
              static_cast<unsigned long long>(report.key_length_L));
  std::printf("Q1_lower         %.6e\n", report.bounds.q1_lower);
  std::printf("e1_upper         %.6e\n", report.bounds.e1_upper);
  std::printf("Qnu_lower        %.6e\n", report.bounds.qnu_lower);
  if (report.protocol.family == Family::kWeakVacuum) {
    std::printf("Y0_lower         %.6e\n", report.bounds.y0_lower);
    std::printf("Y0_upper         %.6e\n", report.bounds.y0_upper);
  }
  if (!report.note.empty()) {
    std::printf("note: %s\n", report.note.c_str());
  }
}

KeyRateReport analyze_config(const RunConfig& config) {
  if (!config.stats) {
    throw Error(ErrorCode::kMissingField,
                "analyze needs a 'stats' block with measured data");
  }
  KeyRateReport report = analyze(config.protocol, config.plan, *config.stats,
                                 analysis_options(config.setup));
  if (config.protocol.family == Family::kWeakVacuum) {
    report.note = kWeakVacuumNote;
  }
  return report;
}

int run_analyze(const CommonArgs& args) {
  const RunConfig config = load_config(args.config_path);
  const KeyRateReport report = analyze_config(config);
  print_report(report);
  Json json = envelope(config, "analyze");
  json["report"] = report_to_json(report);
  emit(json, args.out_path);
  return kExitOk;
}

int run_optimize(const CommonArgs& args) {
  const RunConfig config = load_config(args.config_path);
  const GridSpec grid = config.grid.value_or(GridSpec{});
  const OptimizeResult result =
      optimize(config.setup, config.distance_km, config.protocol.family,
               config.plan, grid);
  std::printf("family       %s @ %.2f km\n", to_string(result.protocol.family),
              config.distance_km);
  std::printf("best rate_R  %.6e  secure=%s\n", result.rate_R,
              result.secure ? "true" : "false");
  std::printf("mu           %.3f\n", result.protocol.mu);
  if (has_weak_state(result.protocol.family)) {
    std::printf("nu           %.3f\n", result.protocol.nu);
  }
  std::printf("fractions    signal=%.2f weak=%.2f vacuum=%.2f\n",
              result.protocol.frac_signal, result.protocol.frac_weak,
              result.protocol.frac_vacuum);

  Json json = envelope(config, "optimize");
  json["distance_km"] = config.distance_km;
  json["best_protocol"] = protocol_to_json(result.protocol);
  json["rate_R"] = result.rate_R;
  json["secure"] = result.secure;
  json["tie_break"] = {"rate_R desc", "mu asc", "nu asc", "frac_signal desc"};
  emit(json, args.out_path);
  return kExitOk;
}

int run_sweep(const CommonArgs& args) {
  const RunConfig config = load_config(args.config_path);
  if (!config.sweep) {
    throw Error(ErrorCode::kParseError, "sweep needs a 'sweep' block");
  }
  const GridSpec grid = config.grid.value_or(GridSpec{});
  std::string csv =
      "distance_km,family,rate_R,mu,nu,frac_signal,frac_weak,frac_vacuum,"
      "secure\n";
  for (Family family : config.sweep->families) {
    const auto points =
        sweep(config.setup, family, config.plan, config.sweep->d_start,
              config.sweep->d_end, config.sweep->d_step, grid);
    for (const auto& point : points) {
      char line[256];
      std::snprintf(line, sizeof(line),
                    "%.6g,%s,%.10e,%.4g,%.4g,%.4g,%.4g,%.4g,%s\n",
                    point.distance_km, to_string(family), point.best_rate_R,
                    point.best_protocol.mu, point.best_protocol.nu,
                    point.best_protocol.frac_signal,
                    point.best_protocol.frac_weak,
                    point.best_protocol.frac_vacuum,
                    point.secure ? "true" : "false");
      csv += line;
    }
  }
  if (!args.out_path.empty()) {
    write_file_atomic(args.out_path, csv);
    std::printf("wrote %s\n", args.out_path.c_str());
  } else {
    std::fputs(csv.c_str(), stdout);
  }
  return kExitOk;
}

int run_montecarlo(const CommonArgs& args) {
  const RunConfig config = load_config(args.config_path);
  if (!config.seeds) {
    throw Error(ErrorCode::kMissingField,
                "montecarlo needs a 'seeds' block");
  }
  Seeds seeds = *config.seeds;
  if (args.seed_override) {
    seeds.schedule = static_cast<std::uint64_t>(*args.seed_override);
    seeds.session = static_cast<std::uint64_t>(*args.seed_override) + 1;
  }
  const ChannelPoint point = transmittance(config.setup, config.distance_km);
  const Schedule schedule =
      generate_schedule(config.plan, config.protocol, seeds.schedule);

  // fixed chunk size keeps tallies independent of the thread count
  constexpr std::size_t kChunk = 1 << 20;
  const std::size_t n = schedule.size();
  EventLog log;
  log.seed = seeds.session;
  log.events.resize(n);
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<Tally> tallies(n_chunks);
  unsigned threads = args.threads > 0
                         ? static_cast<unsigned>(args.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<std::size_t>(threads, n_chunks);

  auto work = [&](unsigned worker) {
    for (std::size_t c = worker; c < n_chunks; c += threads) {
      const std::size_t begin = c * kChunk;
      const std::size_t end = std::min(begin + kChunk, n);
      simulate_session_range(config.setup, point, schedule, seeds.session,
                             begin, end, log);
      tallies[c] = tally_range(schedule, log, begin, end);
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& thread : pool) thread.join();
  }
  Tally total;
  for (const auto& tally : tallies) total.merge(tally);
  const MeasuredStats stats = stats_from_tally(
      total, config.setup.vacuum_error_e0,
      has_weak_state(config.protocol.family),
      config.protocol.family == Family::kWeakVacuum);

  KeyRateReport report = analyze(config.protocol, config.plan, stats,
                                 analysis_options(config.setup));
  if (config.protocol.family == Family::kWeakVacuum) {
    report.note = kWeakVacuumNote;
  }
  // small-sample guard: the decoy fluctuation band reaches zero when
  // N_nu * Q_nu <= u_alpha^2
  std::string warning;
  if (stats.gain_weak_Qnu) {
    const double events = config.protocol.frac_weak *
                          config.plan.total_pulses_N * *stats.gain_weak_Qnu;
    if (events <= config.plan.u_alpha * config.plan.u_alpha) {
      warning =
          "statistical bands are wide: N_nu*Q_nu does not exceed u_alpha^2";
    }
  }

  print_report(report);
  if (!warning.empty()) std::printf("warning: %s\n", warning.c_str());

  Json json = envelope(config, "montecarlo");
  json["seeds"]["schedule"] = seeds.schedule;
  json["seeds"]["session"] = seeds.session;
  json["stats"] = stats_to_json(stats);
  Json counts;
  counts["double_clicks"] = total.double_clicks;
  counts["double_click_ones"] = total.double_click_ones;
  json["counts"] = counts;
  json["report"] = report_to_json(report);
  if (!warning.empty()) json["warning"] = warning;
  emit(json, args.out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decoy-state QKD key-rate toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", decoyqkd::kVersion);

  CommonArgs analyze_args, optimize_args, sweep_args, mc_args;
  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "key-rate lower bound from measured stats");
  add_common(analyze_cmd, analyze_args);
  CLI::App* optimize_cmd =
      app.add_subcommand("optimize", "exhaustive parameter search at one distance");
  add_common(optimize_cmd, optimize_args);
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "optimized rate-vs-distance curves (CSV)");
  add_common(sweep_cmd, sweep_args);
  CLI::App* mc_cmd =
      app.add_subcommand("montecarlo", "pulse-level session simulation");
  add_common(mc_cmd, mc_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze_cmd->parsed()) return run_analyze(analyze_args);
    if (optimize_cmd->parsed()) return run_optimize(optimize_args);
    if (sweep_cmd->parsed()) return run_sweep(sweep_args);
    if (mc_cmd->parsed()) return run_montecarlo(mc_args);
  } catch (const decoyqkd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case decoyqkd::ErrorCode::kParseError:
      case decoyqkd::ErrorCode::kOutOfRange:
      case decoyqkd::ErrorCode::kMissingField:
      case decoyqkd::ErrorCode::kDegenerate:
        return kExitConfig;
      default:
        return kExitNumeric;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
