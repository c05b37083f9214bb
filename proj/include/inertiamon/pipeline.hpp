#pragma once

// End-to-end wiring: per-monitor Step 1 / Step 2, fusion, plant attribution,
// per-event estimation, file-tail follow mode and simulator campaigns.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "inertiamon/error.hpp"
#include "inertiamon/event_detector.hpp"
#include "inertiamon/grid_simulator.hpp"
#include "inertiamon/inertia_estimator.hpp"
#include "inertiamon/io.hpp"
#include "inertiamon/parallel.hpp"
#include "inertiamon/plant.hpp"

namespace inertiamon {

struct DetectionSummary {
  std::size_t streams_read = 0;
  std::size_t candidates = 0;
  std::size_t confirmed = 0;  // per-monitor, before fusion
  std::size_t fused = 0;
  std::map<std::string, std::size_t> rejected_by_reason;
  std::vector<std::string> diagnostics;  // skipped monitors and similar
};

struct DetectionResult {
  std::vector<CandidateEvent> candidates;
  std::vector<Rejection> rejections;
  std::vector<ConfirmedEvent> events;  // fused and attributed, ascending t_event
  DetectionSummary summary;
};

inline DetectionResult detect(const std::vector<SensorStream>& streams, const DetectorConfig& cfg,
                              const PlantRegistry& registry, const MonitorMap& monitor_map) {
  cfg.validate();
  struct PerMonitor {
    std::vector<CandidateEvent> candidates;
    std::vector<Step2Outcome> outcomes;
    std::optional<std::string> skipped;
  };
  std::vector<PerMonitor> per(streams.size());
  parallel_for(streams.size(), [&](std::size_t i) {
    try {
      per[i].candidates = step1_scan(streams[i], cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingVoltage) throw;
      per[i].skipped = "skipped monitor '" + streams[i].monitor_id + "': no voltage channel";
      return;
    }
    for (const auto& c : per[i].candidates) per[i].outcomes.push_back(step2_filter(c, streams[i], cfg));
  });

  DetectionResult out;
  out.summary.streams_read = streams.size();
  std::vector<ConfirmedEvent> confirmed;
  for (auto& p : per) {
    if (p.skipped) out.summary.diagnostics.push_back(*p.skipped);
    out.candidates.insert(out.candidates.end(), p.candidates.begin(), p.candidates.end());
    for (auto& o : p.outcomes) {
      if (auto* ev = std::get_if<ConfirmedEvent>(&o)) {
        confirmed.push_back(std::move(*ev));
      } else {
        auto& r = std::get<Rejection>(o);
        ++out.summary.rejected_by_reason[r.reason];
        out.rejections.push_back(std::move(r));
      }
    }
  }
  out.summary.candidates = out.candidates.size();
  out.summary.confirmed = confirmed.size();
  for (auto& ev : fuse_monitors(std::move(confirmed), cfg)) {
    out.events.push_back(attribute_plant(std::move(ev), registry, monitor_map));
  }
  out.summary.fused = out.events.size();
  return out;
}

struct EstimateRecord {
  ConfirmedEvent event;
  std::optional<InertiaEstimate> estimate;
  std::string skip_reason;  // set when estimate is absent
};

// Estimates each event from the first contributing monitor (in id order) whose
// stream supports both fit windows. Events without a resolvable plant are
// skipped, not failed.
inline std::vector<EstimateRecord> estimate_events(const std::vector<ConfirmedEvent>& events,
                                                   const std::vector<SensorStream>& streams,
                                                   const PlantRegistry& registry, const EstimatorConfig& cfg) {
  cfg.validate();
  std::map<std::string, const SensorStream*> by_id;
  for (const auto& s : streams) by_id[s.monitor_id] = &s;
  std::vector<EstimateRecord> out;
  for (const auto& ev : events) {
    EstimateRecord rec{ev, std::nullopt, {}};
    const PlantSignature* sig = ev.plant_id ? find_plant(registry, *ev.plant_id) : nullptr;
    if (!ev.plant_id) {
      rec.skip_reason = "plant unset";
    } else if (sig == nullptr) {
      rec.skip_reason = "plant '" + *ev.plant_id + "' not in registry";
    } else {
      for (const auto& id : ev.monitor_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
          rec.skip_reason = "no stream for monitor '" + id + "'";
          continue;
        }
        try {
          rec.estimate = estimate(ev, *it->second, *sig, cfg);
          rec.skip_reason.clear();
          break;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kInsufficientData && e.code() != ErrorCode::kRocofBelowFloor) throw;
          rec.skip_reason = std::string(to_string(e.code())) + ": " + e.detail();
        }
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline json estimate_record_to_json(const EstimateRecord& r) {
  if (r.estimate) return estimate_to_json(*r.estimate);
  return json{{"t_event_s", r.event.t_event},
              {"plant_id", r.event.plant_id ? json(*r.event.plant_id) : json(nullptr)},
              {"skipped", r.skip_reason}};
}

// ---------------------------------------------------------------------------
// follow mode

// Tails a set of growing stream files. Each poll() ingests complete appended
// lines and returns the fused events that can no longer change: every window
// that could influence them is already covered by data on every monitor.
// finish() releases the rest. The union of all returned events equals the
// replay result on the completed files.
class StreamFollower {
 public:
  StreamFollower(std::vector<std::filesystem::path> paths, DetectorConfig cfg, PlantRegistry registry,
                 MonitorMap monitor_map)
      : cfg_(std::move(cfg)), registry_(std::move(registry)), monitor_map_(std::move(monitor_map)) {
    cfg_.validate();
    for (auto& p : paths) {
      Source src;
      src.path = std::move(p);
      src.stream.monitor_id = src.path.stem().string();
      sources_.push_back(std::move(src));
    }
  }

  std::vector<ConfirmedEvent> poll() {
    for (auto& src : sources_) read_appended(src);
    double horizon = std::numeric_limits<double>::infinity();
    for (const auto& src : sources_) {
      if (src.stream.empty()) return {};
      horizon = std::min(horizon, src.stream.back_time() - lookahead());
    }
    return release(horizon - cfg_.fusion_window - kTimeEpsilon);
  }

  std::vector<ConfirmedEvent> finish() {
    for (auto& src : sources_) read_appended(src);
    return release(std::numeric_limits<double>::infinity());
  }

  std::vector<SensorStream> streams() const {
    std::vector<SensorStream> out;
    for (const auto& s : sources_) out.push_back(s.stream);
    return out;
  }

  const DetectionSummary& last_summary() const { return summary_; }

 private:
  struct Source {
    std::filesystem::path path;
    std::streamoff offset = 0;
    std::size_t lines = 0;
    bool header = false;
    std::size_t columns = 0;
    SensorStream stream;
  };

  // Farthest a feature computed at time t looks past t.
  double lookahead() const {
    return std::max({0.5 * cfg_.spike_window, cfg_.voltage_settle + cfg_.voltage_span, 0.8 * cfg_.deviation_window,
                     0.5 * cfg_.spike_window + cfg_.osc_window}) +
           kTimeEpsilon;
  }

  static void read_appended(Source& src) {
    std::ifstream in(src.path, std::ios::binary);
    if (!in) return;  // not created yet
    in.seekg(src.offset);
    std::string chunk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto last_newline = chunk.rfind('\n');
    if (last_newline == std::string::npos) return;
    chunk.resize(last_newline + 1);
    std::istringstream lines(chunk);
    try {
      parse_stream_lines(lines, src.stream, src.header, src.columns, src.lines + 1);
    } catch (const Error& e) {
      throw Error(e.code(), src.path.string() + ": " + e.detail(), e.line());
    }
    src.lines += static_cast<std::size_t>(std::count(chunk.begin(), chunk.end(), '\n'));
    src.offset += static_cast<std::streamoff>(chunk.size());
  }

  std::vector<ConfirmedEvent> release(double before) {
    auto result = detect(streams(), cfg_, registry_, monitor_map_);
    summary_ = result.summary;
    std::vector<ConfirmedEvent> fresh;
    for (auto& ev : result.events) {
      if (ev.t_event >= before || emitted_.count(ev.t_event)) continue;
      emitted_.insert(ev.t_event);
      fresh.push_back(std::move(ev));
    }
    return fresh;
  }

  DetectorConfig cfg_;
  PlantRegistry registry_;
  MonitorMap monitor_map_;
  std::vector<Source> sources_;
  std::set<double> emitted_;
  DetectionSummary summary_;
};

// ---------------------------------------------------------------------------
// simulator campaigns

struct CampaignRow {
  std::size_t index = 0;
  int direction = 0;
  std::uint64_t seed = 0;
  double ramp_scale = 1.0;
  double h_true = 0.0;
  double pre_event_rocof_true = 0.0;
  std::optional<double> h_improved;
  std::optional<double> h_traditional;
  std::optional<double> error_improved;
  std::optional<double> error_traditional;
  std::string failure;
};

struct SweepStats {
  double window_length = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  double mean_abs_error = 0.0;
  double median_abs_error = 0.0;
  double max_abs_error = 0.0;
};

struct DirectionSummary {
  int direction = 0;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double mean_error_improved = 0.0;
  double mean_error_traditional = 0.0;
};

struct CampaignReport {
  std::vector<CampaignRow> rows;
  std::vector<DirectionSummary> by_direction;
  std::vector<SweepStats> sweep;
};

inline PlantSignature signature_for(const EventTruth& ev) {
  const double mw = std::abs(ev.delta_p_mw);
  return PlantSignature{ev.plant_id.empty() ? std::string("sim") : ev.plant_id, "sim", mw, mw, 0.0};
}

inline ConfirmedEvent event_from_truth(const EventTruth& ev, const std::string& monitor_id) {
  ConfirmedEvent ce;
  ce.t_event = ev.t_s;
  ce.monitor_ids.insert(monitor_id);
  ce.plant_id = signature_for(ev).plant_id;
  return ce;
}

inline SweepStats summarize_errors(double window, std::vector<double> errors, std::size_t failed) {
  SweepStats s;
  s.window_length = window;
  s.n_ok = errors.size();
  s.n_failed = failed;
  if (errors.empty()) return s;
  std::sort(errors.begin(), errors.end());
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean_abs_error = sum / static_cast<double>(errors.size());
  const std::size_t n = errors.size();
  s.median_abs_error = n % 2 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
  s.max_abs_error = errors.back();
  return s;
}

// Scores every campaign case with both methods at cfg.window_length, using
// the true event time and ΔP on the scenario's first monitor, then sweeps the
// given window lengths with the improved method.
inline CampaignReport evaluate_campaign(const std::vector<CampaignCase>& cases, const EstimatorConfig& cfg,
                                        std::span<const double> sweep_windows = kDefaultSweepWindows) {
  cfg.validate();
  CampaignReport report;
  report.rows.resize(cases.size());
  std::vector<std::vector<std::optional<double>>> sweep_errors(cases.size());
  parallel_for(cases.size(), [&](std::size_t k) {
    const auto& c = cases[k];
    auto& row = report.rows[k];
    row.index = c.index;
    row.direction = c.direction;
    row.seed = c.seed;
    row.ramp_scale = c.ramp_scale;
    row.h_true = c.trace.truth.h_true_mw_s;
    if (c.trace.truth.events.empty()) {
      row.failure = "scenario has no event";
      return;
    }
    const auto& truth = c.trace.truth.events.front();
    row.pre_event_rocof_true = truth.pre_event_rocof_hz_per_s;
    const auto& stream = c.trace.streams.front();
    const auto ev = event_from_truth(truth, stream.monitor_id);
    const auto sig = signature_for(truth);
    EstimatorConfig local = cfg;
    local.f0 = c.trace.truth.f0_hz;
    try {
      row.h_improved = estimate(ev, stream, sig, local).h_mw_s;
      row.error_improved = error_rate(*row.h_improved, row.h_true);
      row.h_traditional = traditional_estimate(ev, stream, sig, local).h_mw_s;
      row.error_traditional = error_rate(*row.h_traditional, row.h_true);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInvalidConfig) throw;
      row.failure = std::string(to_string(e.code())) + ": " + e.detail();
    }
    for (const auto& entry : window_sweep(ev, stream, sig, local, sweep_windows)) {
      sweep_errors[k].push_back(entry.estimate ? std::optional(error_rate(entry.estimate->h_mw_s, row.h_true))
                                               : std::nullopt);
    }
  });

  std::vector<int> directions;
  for (const auto& r : report.rows) {
    if (std::find(directions.begin(), directions.end(), r.direction) == directions.end()) directions.push_back(r.direction);
  }
  for (int d : directions) {
    DirectionSummary s;
    s.direction = d;
    std::vector<double> imp, trad;
    for (const auto& r : report.rows) {
      if (r.direction != d) continue;
      ++s.cases;
      if (!r.error_improved || !r.error_traditional) {
        ++s.failures;
        continue;
      }
      imp.push_back(*r.error_improved);
      trad.push_back(*r.error_traditional);
    }
    s.mean_error_improved = summarize_errors(0, imp, 0).mean_abs_error;
    s.mean_error_traditional = summarize_errors(0, trad, 0).mean_abs_error;
    report.by_direction.push_back(s);
  }
  for (std::size_t w = 0; w < sweep_windows.size(); ++w) {
    std::vector<double> errs;
    std::size_t failed = 0;
    for (const auto& per_case : sweep_errors) {
      if (w < per_case.size() && per_case[w]) errs.push_back(*per_case[w]);
      else ++failed;
    }
    report.sweep.push_back(summarize_errors(sweep_windows[w], errs, failed));
  }
  return report;
}

inline std::string campaign_rows_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "case,direction,seed,ramp_scale,h_true_mw_s,pre_event_rocof_hz_per_s,h_improved_mw_s,h_traditional_mw_s,"
         "error_improved,error_traditional,failure\n";
  auto opt = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string(); };
  for (const auto& r : report.rows) {
    out << r.index << ',' << (r.direction > 0 ? "up" : "down") << ',' << r.seed << ',' << format_number(r.ramp_scale) << ','
        << format_number(r.h_true) << ',' << format_number(r.pre_event_rocof_true) << ',' << opt(r.h_improved) << ','
        << opt(r.h_traditional) << ',' << opt(r.error_improved) << ',' << opt(r.error_traditional) << ',' << r.failure
        << '\n';
  }
  return out.str();
}

inline std::string sweep_csv(const std::vector<SweepStats>& sweep) {
  std::ostringstream out;
  out << "window_length_s,n_ok,n_failed,mean_abs_error,median_abs_error,max_abs_error\n";
  for (const auto& s : sweep) {
    out << format_number(s.window_length) << ',' << s.n_ok << ',' << s.n_failed << ',' << format_number(s.mean_abs_error)
        << ',' << format_number(s.median_abs_error) << ',' << format_number(s.max_abs_error) << '\n';
  }
  return out.str();
}

inline json campaign_summary_to_json(const CampaignReport& report) {
  json dirs = json::array();
  for (const auto& d : report.by_direction) {
    dirs.push_back({{"ramp_direction", d.direction > 0 ? "up" : "down"},
                    {"cases", d.cases},
                    {"failures", d.failures},
                    {"mean_abs_error_improved", d.mean_error_improved},
                    {"mean_abs_error_traditional", d.mean_error_traditional}});
  }
  json sweep = json::array();
  for (const auto& s : report.sweep) {
    sweep.push_back({{"window_length_s", s.window_length},
                     {"n_ok", s.n_ok},
                     {"n_failed", s.n_failed},
                     {"mean_abs_error", s.mean_abs_error},
                     {"median_abs_error", s.median_abs_error},
                     {"max_abs_error", s.max_abs_error}});
  }
  return json{{"cases", report.rows.size()}, {"by_direction", dirs}, {"window_sweep", sweep}};
}

}  // namespace inertiamon
