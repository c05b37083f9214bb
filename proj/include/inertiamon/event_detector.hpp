#pragma once

// Two-step pump switching-off trigger.
//
// Step 1 scans one monitor's stream and raises a candidate wherever all three
// local features clear their thresholds at the same instant:
//   (a) short-window RoCoF (the local frequency spike),
//   (b) median voltage step,
//   (c) largest frequency deviation over a longer window.
// Step 2 rejects candidates whose post-event frequency keeps oscillating.
// Confirmed events from several monitors are then fused and attributed to a
// nearby plant.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "inertiamon/error.hpp"
#include "inertiamon/plant.hpp"
#include "inertiamon/signal_kernel.hpp"

namespace inertiamon {

struct FrequencyBand {
  double low_hz = 0.1;
  double high_hz = 2.0;

  bool contains(double hz) const { return hz >= low_hz && hz <= high_hz; }
};

struct DetectorConfig {
  double rocof_spike_threshold = 0.05;   // Hz/s
  double spike_window = 0.2;             // s, centred on the scanned sample
  double voltage_step_threshold = 0.005; // pu
  double voltage_settle = 0.2;           // s, skipped on each side of the sample
  double voltage_span = 0.5;             // s, median span on each side
  double deviation_threshold = 0.008;    // Hz
  double deviation_window = 10.0;        // s, leading 20% lies before the sample
  double holdoff = 30.0;                 // s
  int osc_cycle_min = 4;                 // sign alternations
  FrequencyBand osc_band{};
  double osc_window = 5.0;               // s observed after the event
  double osc_hysteresis = 0.002;         // Hz, residual must leave +/- this band to flip sign
  double fusion_window = 2.0;            // s

  void validate() const {
    auto positive = [](double x, const char* name) {
      if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::kInvalidConfig, std::string(name) + " must be > 0");
    };
    positive(rocof_spike_threshold, "rocof_spike_threshold");
    positive(spike_window, "spike_window");
    positive(voltage_step_threshold, "voltage_step_threshold");
    positive(voltage_span, "voltage_span");
    positive(deviation_threshold, "deviation_threshold");
    positive(deviation_window, "deviation_window");
    positive(holdoff, "holdoff");
    positive(osc_window, "osc_window");
    positive(fusion_window, "fusion_window");
    if (!(voltage_settle >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "voltage_settle must be >= 0");
    if (!(osc_hysteresis >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "osc_hysteresis must be >= 0");
    if (osc_cycle_min < 1) throw Error(ErrorCode::kInvalidConfig, "osc_cycle_min must be >= 1");
    if (!(holdoff > spike_window)) throw Error(ErrorCode::kInvalidConfig, "holdoff must exceed spike_window");
    if (!(osc_band.low_hz > 0.0 && osc_band.low_hz < osc_band.high_hz)) {
      throw Error(ErrorCode::kInvalidConfig, "osc_band requires 0 < low < high");
    }
  }
};

struct CandidateEvent {
  double t_event = 0.0;
  std::string monitor_id;
  double spike_rocof = 0.0;  // Hz/s, signed
  double v_step = 0.0;       // pu, signed
  double f_deviation = 0.0;  // Hz

  friend bool operator==(const CandidateEvent&, const CandidateEvent&) = default;
};

struct ConfirmedEvent {
  double t_event = 0.0;
  std::set<std::string> monitor_ids;
  std::optional<std::string> plant_id;
  std::map<std::string, CandidateEvent> features;  // keyed by monitor
  std::vector<std::string> diagnostics;

  friend bool operator==(const ConfirmedEvent&, const ConfirmedEvent&) = default;
};

struct Rejection {
  CandidateEvent candidate;
  std::string reason;
};

using Step2Outcome = std::variant<ConfirmedEvent, Rejection>;

// Feature values at one sample, or nullopt when any feature is below its
// threshold or cannot be evaluated there (stream edge, data gap).
inline std::optional<CandidateEvent> evaluate_features(const SensorStream& stream, std::size_t index,
                                                       const DetectorConfig& cfg) {
  const double t = stream.samples[index].t;
  CandidateEvent c;
  c.t_event = t;
  c.monitor_id = stream.monitor_id;
  try {
    c.spike_rocof = rocof(stream, Window{t - 0.5 * cfg.spike_window, cfg.spike_window}).slope;
    if (std::abs(c.spike_rocof) < cfg.rocof_spike_threshold) return std::nullopt;
    c.v_step = voltage_step(stream, t, cfg.voltage_settle, cfg.voltage_span);
    if (std::abs(c.v_step) < cfg.voltage_step_threshold) return std::nullopt;
    c.f_deviation = max_frequency_deviation(stream, Window{t - 0.2 * cfg.deviation_window, cfg.deviation_window});
    if (c.f_deviation < cfg.deviation_threshold) return std::nullopt;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kWindowTooSparse || e.code() == ErrorCode::kNonFinite) return std::nullopt;
    throw;
  }
  return c;
}

// Step 1. Throws MissingVoltage for a stream without a voltage channel; the
// caller decides to skip that monitor.
inline std::vector<CandidateEvent> step1_scan(const SensorStream& stream, const DetectorConfig& cfg) {
  cfg.validate();
  if (!stream.has_voltage()) {
    throw Error(ErrorCode::kMissingVoltage, "monitor '" + stream.monitor_id + "' excluded from step 1");
  }
  std::vector<CandidateEvent> out;
  const auto& s = stream.samples;
  std::size_t i = 0;
  while (i < s.size()) {
    auto hit = evaluate_features(stream, i, cfg);
    if (!hit) {
      ++i;
      continue;
    }
    // The triggering region is the run of consecutive samples that all pass;
    // the event time is where the short-window RoCoF peaks.
    CandidateEvent best = *hit;
    std::size_t j = i + 1;
    for (; j < s.size() && s[j].t < s[i].t + cfg.holdoff; ++j) {
      auto next = evaluate_features(stream, j, cfg);
      if (!next) break;
      if (std::abs(next->spike_rocof) > std::abs(best.spike_rocof)) best = *next;
    }
    out.push_back(best);
    const double resume = best.t_event + cfg.holdoff;
    i = static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), resume - kTimeEpsilon,
                                                  [](const TimedSample& x, double t) { return x.t < t; }) -
                                 s.begin());
  }
  return out;
}

struct OscillationReport {
  std::vector<double> alternation_times;  // s
  double implied_frequency_hz = 0.0;      // from the mean spacing of alternations
  bool oscillating = false;
};

// Counts sign alternations of the detrended residuals with hysteresis: the
// sign only flips once a residual leaves the +/- hysteresis band on the other
// side. With zero hysteresis this is the plain sign-change count.
inline OscillationReport analyze_oscillation(std::span<const TimedSample> samples, const DetectorConfig& cfg) {
  OscillationReport report;
  if (samples.size() < 3) return report;
  const auto residuals = detrend(samples);
  int sign = 0;
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    int now = sign;
    if (residuals[k] > cfg.osc_hysteresis) now = 1;
    else if (residuals[k] < -cfg.osc_hysteresis) now = -1;
    if (sign != 0 && now != sign) report.alternation_times.push_back(samples[k].t);
    sign = now;
  }
  const auto n = report.alternation_times.size();
  if (n >= 2) {
    const double spread = report.alternation_times.back() - report.alternation_times.front();
    // n alternations bound n - 1 half-cycles.
    report.implied_frequency_hz = static_cast<double>(n - 1) / (2.0 * spread);
  }
  report.oscillating = static_cast<int>(n) >= cfg.osc_cycle_min && n >= 2 &&
                       cfg.osc_band.contains(report.implied_frequency_hz);
  return report;
}

// Step 2. Rejection is a value, not an error.
inline Step2Outcome step2_filter(const CandidateEvent& candidate, const SensorStream& stream,
                                 const DetectorConfig& cfg) {
  const Window after{candidate.t_event + 0.5 * cfg.spike_window, cfg.osc_window};
  const auto report = analyze_oscillation(select(stream, after), cfg);
  if (report.oscillating) return Rejection{candidate, "oscillation"};
  ConfirmedEvent ev;
  ev.t_event = candidate.t_event;
  ev.monitor_ids.insert(candidate.monitor_id);
  ev.features.emplace(candidate.monitor_id, candidate);
  return ev;
}

// Merges events whose times fall within fusion_window of the earliest event of
// a group. Any single-monitor event survives. The result is independent of
// input order, and fusing it again is a no-op.
inline std::vector<ConfirmedEvent> fuse_monitors(std::vector<ConfirmedEvent> events, const DetectorConfig& cfg) {
  std::sort(events.begin(), events.end(), [](const ConfirmedEvent& a, const ConfirmedEvent& b) {
    if (a.t_event != b.t_event) return a.t_event < b.t_event;
    return a.monitor_ids < b.monitor_ids;
  });
  std::vector<ConfirmedEvent> fused;
  for (auto& ev : events) {
    if (!fused.empty() && ev.t_event - fused.back().t_event <= cfg.fusion_window + kTimeEpsilon) {
      auto& group = fused.back();
      group.monitor_ids.insert(ev.monitor_ids.begin(), ev.monitor_ids.end());
      for (auto& [id, feat] : ev.features) group.features.emplace(id, feat);  // earliest wins
      if (!group.plant_id) group.plant_id = ev.plant_id;
      for (auto& d : ev.diagnostics) {
        if (std::find(group.diagnostics.begin(), group.diagnostics.end(), d) == group.diagnostics.end()) {
          group.diagnostics.push_back(d);
        }
      }
      continue;
    }
    fused.push_back(std::move(ev));
  }
  return fused;
}

// Static monitor -> nearby plant table; monitors near no plant map to nullopt
// or are simply absent.
using MonitorMap = std::map<std::string, std::optional<std::string>>;

inline ConfirmedEvent attribute_plant(ConfirmedEvent event, const PlantRegistry& registry,
                                      const MonitorMap& monitor_map) {
  std::set<std::string> plants;
  for (const auto& id : event.monitor_ids) {
    auto it = monitor_map.find(id);
    if (it != monitor_map.end() && it->second) plants.insert(*it->second);
  }
  event.plant_id.reset();
  if (plants.size() == 1) {
    event.plant_id = *plants.begin();
    if (find_plant(registry, *event.plant_id) == nullptr) {
      event.diagnostics.push_back("plant '" + *event.plant_id + "' not in registry");
    }
  } else if (plants.size() > 1) {
    std::string names;
    for (const auto& p : plants) names += (names.empty() ? "" : ",") + p;
    event.diagnostics.push_back("ambiguous plant attribution: " + names);
  }
  return event;
}

}  // namespace inertiamon
