// inertiamon: detect pump switching-off events in frequency/voltage streams,
// estimate system inertia from them, run simulator campaigns and summarize
// event ledgers.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "inertiamon/fleet_analytics.hpp"
#include "inertiamon/io.hpp"
#include "inertiamon/pipeline.hpp"

namespace fs = std::filesystem;
using namespace inertiamon;

namespace {

int verbosity = 1;

template <typename... Args>
void log(int level, const char* fmt, Args... args) {
  if (level > verbosity) return;
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

struct RunConfig {
  DetectorConfig detector;
  EstimatorConfig estimator;
  std::optional<fs::path> registry;
  std::optional<fs::path> monitor_map;
};

// Config file: {"detector": {...}, "estimator": {...}, "registry": path,
// "monitor_map": path}. Every key is optional; relative paths resolve against
// the config file's directory.
RunConfig load_config(const std::string& path) {
  RunConfig rc;
  if (path.empty()) return rc;
  const json j = read_json_file(path, ErrorCode::kInvalidConfig);
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, path + ": top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "detector" && key != "estimator" && key != "registry" && key != "monitor_map") {
      throw Error(ErrorCode::kInvalidConfig, path + ": unknown key '" + key + "'");
    }
  }
  const fs::path base = fs::path(path).parent_path();
  try {
    if (j.contains("detector")) rc.detector = detector_config_from_json(j.at("detector"));
    if (j.contains("estimator")) rc.estimator = estimator_config_from_json(j.at("estimator"));
    if (j.contains("registry")) rc.registry = base / j.at("registry").get<std::string>();
    if (j.contains("monitor_map")) rc.monitor_map = base / j.at("monitor_map").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
  return rc;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

std::vector<SensorStream> read_streams(const std::vector<std::string>& inputs) {
  std::vector<SensorStream> streams;
  std::set<std::string> ids;
  for (const auto& p : inputs) {
    streams.push_back(parse_stream_csv(fs::path(p)));
    if (!ids.insert(streams.back().monitor_id).second) {
      throw Error(ErrorCode::kInvalidConfig, "two inputs share monitor id '" + streams.back().monitor_id + "'");
    }
    log(2, "read %s: %zu samples", p.c_str(), streams.back().samples.size());
  }
  return streams;
}

PlantRegistry require_registry(const std::optional<fs::path>& path) {
  if (!path) throw Error(ErrorCode::kInvalidConfig, "a plant registry is required (--registry)");
  return parse_registry(*path);
}

std::string summary_line(const DetectionSummary& s) {
  std::string out = "streams=" + std::to_string(s.streams_read) + " candidates=" + std::to_string(s.candidates) +
                    " confirmed=" + std::to_string(s.confirmed) + " events=" + std::to_string(s.fused) + " rejected:";
  if (s.rejected_by_reason.empty()) out += " none";
  for (const auto& [reason, n] : s.rejected_by_reason) out += " " + reason + "=" + std::to_string(n);
  return out;
}

// ---------------------------------------------------------------------------

struct DetectArgs {
  std::string config;
  std::vector<std::string> inputs;
  std::string registry, monitor_map;
  std::string out_dir = ".";
  bool follow = false;
  double poll_s = 1.0;
  double idle_s = 10.0;
};

int cmd_detect(const DetectArgs& a) {
  auto rc = load_config(a.config);
  if (!a.registry.empty()) rc.registry = a.registry;
  if (!a.monitor_map.empty()) rc.monitor_map = a.monitor_map;
  const PlantRegistry registry = rc.registry ? parse_registry(*rc.registry) : PlantRegistry{};
  const MonitorMap map = rc.monitor_map ? parse_monitor_map(*rc.monitor_map) : MonitorMap{};
  auto out = open_output(fs::path(a.out_dir) / "events.jsonl");

  if (!a.follow) {
    const auto result = detect(read_streams(a.inputs), rc.detector, registry, map);
    for (const auto& ev : result.events) out << event_to_json(ev).dump() << '\n';
    for (const auto& d : result.summary.diagnostics) log(1, "%s", d.c_str());
    log(0, "%s", summary_line(result.summary).c_str());
    return 0;
  }

  std::vector<fs::path> paths(a.inputs.begin(), a.inputs.end());
  StreamFollower follower(paths, rc.detector, registry, map);
  auto sizes = [&] {
    std::uintmax_t total = 0;
    std::error_code ec;
    for (const auto& p : paths) {
      const auto n = fs::file_size(p, ec);
      if (!ec) total += n;
    }
    return total;
  };
  auto emit = [&](const std::vector<ConfirmedEvent>& events) {
    for (const auto& ev : events) {
      out << event_to_json(ev).dump() << '\n';
      log(1, "event t=%.3f s monitors=%zu", ev.t_event, ev.monitor_ids.size());
    }
    out.flush();
  };
  // Stops once no input has grown for idle_s seconds.
  auto last_size = sizes();
  auto last_growth = std::chrono::steady_clock::now();
  while (true) {
    emit(follower.poll());
    std::this_thread::sleep_for(std::chrono::duration<double>(a.poll_s));
    const auto now_size = sizes();
    if (now_size != last_size) {
      last_size = now_size;
      last_growth = std::chrono::steady_clock::now();
    } else if (std::chrono::steady_clock::now() - last_growth >= std::chrono::duration<double>(a.idle_s)) {
      break;
    }
  }
  emit(follower.finish());
  log(0, "%s", summary_line(follower.last_summary()).c_str());
  return 0;
}

struct EstimateArgs {
  std::string config;
  std::string events;
  std::vector<std::string> inputs;
  std::string registry;
  std::string out_dir = ".";
};

int cmd_estimate(const EstimateArgs& a) {
  auto rc = load_config(a.config);
  if (!a.registry.empty()) rc.registry = a.registry;
  const auto registry = require_registry(rc.registry);
  std::vector<ConfirmedEvent> events;
  auto in = open_input(a.events);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    try {
      events.push_back(event_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, a.events + ": " + e.what(), line_no);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, a.events + ": " + e.detail(), line_no);
    }
  }
  const auto records = estimate_events(events, read_streams(a.inputs), registry, rc.estimator);
  auto out = open_output(fs::path(a.out_dir) / "estimates.jsonl");
  std::size_t ok = 0;
  for (const auto& r : records) {
    out << estimate_record_to_json(r).dump() << '\n';
    if (r.estimate) {
      ++ok;
      log(1, "t=%.3f s H=%.6g MW*s", r.estimate->t_event, r.estimate->h_mw_s);
    } else {
      log(1, "t=%.3f s skipped: %s", r.event.t_event, r.skip_reason.c_str());
    }
  }
  log(0, "events=%zu estimated=%zu skipped=%zu", records.size(), ok, records.size() - ok);
  return 0;
}

struct CampaignArgs {
  std::string config;
  std::string scenario;
  std::size_t count = 66;
  std::string directions = "both";
  std::optional<std::uint64_t> seed;
  double ramp_scale_min = 1.0, ramp_scale_max = 1.0;
  std::vector<double> windows{kDefaultSweepWindows.begin(), kDefaultSweepWindows.end()};
  std::string out_dir = ".";
};

int cmd_campaign(const CampaignArgs& a) {
  const auto rc = load_config(a.config);
  const auto base = load_scenario(a.scenario);
  CampaignSpec spec;
  spec.count_per_direction = a.count;
  spec.master_seed = a.seed;
  spec.ramp_scale_min = a.ramp_scale_min;
  spec.ramp_scale_max = a.ramp_scale_max;
  if (a.directions == "up") spec.directions = {+1};
  if (a.directions == "down") spec.directions = {-1};
  const auto t0 = std::chrono::steady_clock::now();
  const auto cases = run_campaign(base, spec);
  const auto report = evaluate_campaign(cases, rc.estimator, a.windows);
  const fs::path dir(a.out_dir);
  write_text(dir / "campaign_cases.csv", campaign_rows_csv(report));
  write_text(dir / "window_sweep.csv", sweep_csv(report.sweep));
  write_text(dir / "campaign_summary.json", campaign_summary_to_json(report).dump(2) + "\n");
  for (const auto& d : report.by_direction) {
    log(0, "%s: cases=%zu improved=%.2f%% traditional=%.2f%% failed=%zu", d.direction < 0 ? "down" : "up", d.cases,
        100.0 * d.mean_error_improved, 100.0 * d.mean_error_traditional, d.failures);
  }
  log(1, "%zu cases in %.2f s", cases.size(),
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

struct AnalyzeArgs {
  std::string ledger;
  std::vector<std::string> plants;
  double bin_width = 5.0;
  std::vector<int> low_inertia_span;
  std::string out_dir = "reports";
};

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_low_mw,bin_high_mw,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += format_number(h.edge(i)) + "," + format_number(h.edge(i + 1)) + "," + std::to_string(h.counts[i]) + "\n";
  }
  return out;
}

std::string hourly_csv(const TimeOfDayProfile& p) {
  std::string out = "hour,count\n";
  for (std::size_t h = 0; h < p.hourly.size(); ++h) out += std::to_string(h) + "," + std::to_string(p.hourly[h]) + "\n";
  return out;
}

int cmd_analyze(const AnalyzeArgs& a) {
  const auto ledger = parse_ledger(fs::path(a.ledger));
  std::vector<std::string> plants = a.plants;
  if (plants.empty()) {
    std::set<std::string> seen;
    for (const auto& r : ledger.records) seen.insert(r.plant_id);
    plants.assign(seen.begin(), seen.end());
  }
  std::optional<HourSpan> span;
  if (!a.low_inertia_span.empty()) span = HourSpan{a.low_inertia_span[0], a.low_inertia_span[1]};

  for (const auto& plant : plants) {
    const fs::path dir = fs::path(a.out_dir) / plant;
    fs::create_directories(dir);
    try {
      const auto stats = mw_step_stats(ledger, plant, a.bin_width);
      write_text(dir / "mw_step_stats.json", mw_step_stats_to_json(stats).dump(2) + "\n");
      write_text(dir / "mw_histogram.csv", histogram_csv(stats.histogram));
      write_text(dir / "monthly_profile.json", monthly_to_json(monthly_mw_profile(ledger, plant)).dump(2) + "\n");
      log(0, "%s: %zu MW records, mean %.2f MW, max deviation %.3f%%, mean deviation %.3f%%", plant.c_str(), stats.count,
          stats.mean_mw, 100.0 * stats.max_abs_deviation_ratio, 100.0 * stats.mean_abs_deviation_ratio);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientRecords) throw;
      log(0, "%s: MW reports skipped: %s", plant.c_str(), e.detail().c_str());
    }
    const auto daily = daily_event_counts(ledger, plant);
    write_text(dir / "daily_counts.json", daily_to_json(daily).dump(2) + "\n");
    const auto tod = time_of_day_profile(ledger, plant, span);
    write_text(dir / "time_of_day.json", time_of_day_to_json(tod).dump(2) + "\n");
    write_text(dir / "hourly.csv", hourly_csv(tod));
    log(0, "%s: %zu events, %.2f/day (max %zu), busiest hours %02d-%02d", plant.c_str(), daily.total,
        daily.mean_per_day, daily.max_per_day, tod.modal_span.start_hour, tod.modal_span.end_hour);
  }
  return 0;
}

struct SimulateArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

int cmd_simulate(const SimulateArgs& a) {
  auto sc = load_scenario(a.scenario);
  if (a.seed) sc.noise.seed = *a.seed;
  const auto trace = simulate(sc);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  for (const auto& s : trace.streams) {
    write_stream_csv(dir / (s.monitor_id + ".csv"), s);
    log(1, "wrote %s.csv (%zu samples)", s.monitor_id.c_str(), s.samples.size());
  }
  write_text(dir / "truth.json", truth_to_json(trace.truth).dump(2) + "\n");
  log(0, "monitors=%zu events=%zu duration=%.1f s", trace.streams.size(), trace.truth.events.size(), sc.duration_s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inertia monitoring from pump switching-off events"};
  app.require_subcommand(1);
  app.fallthrough();  // shared flags may follow the subcommand
  app.add_option("--verbosity", verbosity, "0 = summary only, 1 = per record, 2 = debug")
      ->check(CLI::Range(0, 2))
      ->capture_default_str();
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "master seed (campaign) or noise seed (simulate)");

  DetectArgs det;
  auto* detect_cmd = app.add_subcommand("detect", "run the two-step trigger over stream CSVs, write events.jsonl");
  detect_cmd->add_option("inputs", det.inputs, "stream CSV files, monitor id = file stem")->required();
  detect_cmd->add_option("--config", det.config, "JSON run config")->check(CLI::ExistingFile);
  detect_cmd->add_option("--registry", det.registry, "plant registry CSV")->check(CLI::ExistingFile);
  detect_cmd->add_option("--monitor-map", det.monitor_map, "monitor_id,plant_id CSV")->check(CLI::ExistingFile);
  detect_cmd->add_option("--out", det.out_dir, "output directory")->capture_default_str();
  detect_cmd->add_flag("--follow", det.follow, "tail the inputs as they grow");
  detect_cmd->add_option("--poll-s", det.poll_s, "follow: poll interval")->capture_default_str();
  detect_cmd->add_option("--idle-s", det.idle_s, "follow: stop after inputs stop growing this long")
      ->capture_default_str();

  EstimateArgs est;
  auto* estimate_cmd = app.add_subcommand("estimate", "estimate inertia for events.jsonl, write estimates.jsonl");
  estimate_cmd->add_option("events", est.events, "events.jsonl from detect")->required()->check(CLI::ExistingFile);
  estimate_cmd->add_option("inputs", est.inputs, "stream CSV files")->required();
  estimate_cmd->add_option("--config", est.config, "JSON run config")->check(CLI::ExistingFile);
  estimate_cmd->add_option("--registry", est.registry, "plant registry CSV");
  estimate_cmd->add_option("--out", est.out_dir, "output directory")->capture_default_str();

  CampaignArgs camp;
  auto* campaign_cmd = app.add_subcommand("campaign", "simulate ramp cases and tabulate estimator error");
  campaign_cmd->add_option("scenario", camp.scenario, "base scenario JSON")->required()->check(CLI::ExistingFile);
  campaign_cmd->add_option("--config", camp.config, "JSON run config")->check(CLI::ExistingFile);
  campaign_cmd->add_option("--count", camp.count, "cases per ramp direction")->capture_default_str();
  campaign_cmd->add_option("--directions", camp.directions, "both, up or down")
      ->check(CLI::IsMember({"both", "up", "down"}))
      ->capture_default_str();
  campaign_cmd->add_option("--ramp-scale-min", camp.ramp_scale_min)->capture_default_str();
  campaign_cmd->add_option("--ramp-scale-max", camp.ramp_scale_max)->capture_default_str();
  campaign_cmd->add_option("--windows", camp.windows, "sweep window lengths, s")->delimiter(',');
  campaign_cmd->add_option("--out", camp.out_dir, "output directory")->capture_default_str();

  AnalyzeArgs ana;
  auto* analyze_cmd = app.add_subcommand("analyze", "MW, monthly, daily and time-of-day reports from a ledger");
  analyze_cmd->add_option("ledger", ana.ledger, "ledger CSV")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--plant", ana.plants, "plants to report (default: all in ledger)");
  analyze_cmd->add_option("--bin-width", ana.bin_width, "MW histogram bin width")->capture_default_str();
  analyze_cmd->add_option("--low-inertia-span", ana.low_inertia_span, "start,end local hours, e.g. 1,5")
      ->delimiter(',')
      ->expected(2)
      ->check(CLI::Range(0, 23));
  analyze_cmd->add_option("--out", ana.out_dir, "reports directory")->capture_default_str();

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "export per-monitor stream CSVs and truth.json");
  simulate_cmd->add_option("scenario", sim.scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("--out", sim.out_dir, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*detect_cmd) return cmd_detect(det);
    if (*estimate_cmd) return cmd_estimate(est);
    if (*campaign_cmd) {
      camp.seed = seed;
      return cmd_campaign(camp);
    }
    if (*analyze_cmd) return cmd_analyze(ana);
    if (*simulate_cmd) {
      sim.seed = seed;
      return cmd_simulate(sim);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
