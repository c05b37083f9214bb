#pragma once

// Flat-file formats and JSON records.
//
//   stream CSV     t_s,f_hz[,v_pu]           header required, t strictly increasing
//   registry CSV   plant_id,region,unit_capacity_mw,mw_step_mean_mw,mw_step_tolerance
//   monitor map    monitor_id,plant_id       empty plant_id = near no plant
//   ledger CSV     t_event_utc,plant_id,mw_observed,h_estimate_mw_s
//                  optional directive line "# utc_offset_minutes=<int>"
//
// Lines starting with '#' are comments. Numbers are written in shortest
// round-trip form so export followed by parse reproduces the exact doubles.

#include <charconv>
#include <cstdio>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "inertiamon/error.hpp"
#include "inertiamon/event_detector.hpp"
#include "inertiamon/fleet_analytics.hpp"
#include "inertiamon/grid_simulator.hpp"
#include "inertiamon/inertia_estimator.hpp"
#include "inertiamon/plant.hpp"
#include "inertiamon/signal_kernel.hpp"

namespace inertiamon {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// text helpers

inline std::string format_number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw Error(ErrorCode::kIo, "cannot format number");
  return {buf, end};
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::optional<double> try_parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return x;
}

inline double parse_double(std::string_view s, std::size_t line, const char* what) {
  auto x = try_parse_double(s);
  if (!x) throw Error(ErrorCode::kParseError, std::string("bad ") + what + " '" + std::string(s) + "'", line);
  if (!std::isfinite(*x)) throw Error(ErrorCode::kParseError, std::string("non-finite ") + what, line);
  return *x;
}

inline bool is_skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return in;
}

// ---------------------------------------------------------------------------
// sensor streams

// Parses complete lines; `first_line` lets a follower resume mid-file with
// correct line numbers. Appends to `stream`, enforcing monotone time against
// samples already present.
inline void parse_stream_lines(std::istream& in, SensorStream& stream, bool& header_seen, std::size_t& columns,
                               std::size_t first_line = 1) {
  std::string line;
  std::size_t line_no = first_line - 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto cells = split_csv(line);
    if (!header_seen) {
      if (try_parse_double(cells.front())) throw Error(ErrorCode::kParseError, "header line required", line_no);
      if (cells.size() < 2 || cells.size() > 3) {
        throw Error(ErrorCode::kParseError, "expected columns t_s,f_hz[,v_pu]", line_no);
      }
      columns = cells.size();
      header_seen = true;
      continue;
    }
    if (cells.size() != columns) {
      throw Error(ErrorCode::kParseError,
                  "expected " + std::to_string(columns) + " columns, got " + std::to_string(cells.size()), line_no);
    }
    TimedSample s;
    s.t = parse_double(cells[0], line_no, "time");
    s.f = parse_double(cells[1], line_no, "frequency");
    if (columns == 3 && !cells[2].empty()) s.v = parse_double(cells[2], line_no, "voltage");
    if (!stream.samples.empty() && !(s.t > stream.samples.back().t)) {
      throw Error(ErrorCode::kNonMonotonicTime,
                  "t = " + std::string(cells[0]) + " does not exceed previous " + format_number(stream.samples.back().t),
                  line_no);
    }
    stream.samples.push_back(s);
  }
}

inline SensorStream parse_stream_csv(std::istream& in, std::string monitor_id) {
  SensorStream stream;
  stream.monitor_id = std::move(monitor_id);
  bool header = false;
  std::size_t columns = 0;
  parse_stream_lines(in, stream, header, columns);
  if (!header) throw Error(ErrorCode::kParseError, "empty stream file: header line required", 1);
  return stream;
}

// The monitor id is the file stem.
inline SensorStream parse_stream_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return parse_stream_csv(in, path.stem().string());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail(), e.line());
  }
}

inline void write_stream_csv(std::ostream& out, const SensorStream& stream) {
  const bool voltage = stream.has_voltage();
  out << (voltage ? "t_s,f_hz,v_pu\n" : "t_s,f_hz\n");
  for (const auto& s : stream.samples) {
    out << format_number(s.t) << ',' << format_number(s.f);
    if (voltage) {
      out << ',';
      if (s.v) out << format_number(*s.v);
    }
    out << '\n';
  }
}

inline void write_stream_csv(const std::filesystem::path& path, const SensorStream& stream) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  write_stream_csv(out, stream);
}

// ---------------------------------------------------------------------------
// registry and monitor map

inline PlantRegistry parse_registry(std::istream& in) {
  PlantRegistry reg;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto cells = split_csv(line);
    if (!header) {
      header = true;
      continue;
    }
    if (cells.size() != 5) throw Error(ErrorCode::kParseError, "registry rows need 5 columns", line_no);
    PlantSignature p;
    p.plant_id = std::string(cells[0]);
    p.region = std::string(cells[1]);
    p.unit_capacity_mw = parse_double(cells[2], line_no, "unit_capacity_mw");
    p.mw_step_mean_mw = parse_double(cells[3], line_no, "mw_step_mean_mw");
    p.mw_step_tolerance = parse_double(cells[4], line_no, "mw_step_tolerance");
    try {
      p.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, e.detail(), line_no);
    }
    if (!ids.insert(p.plant_id).second) throw Error(ErrorCode::kParseError, "duplicate plant '" + p.plant_id + "'", line_no);
    reg.push_back(std::move(p));
  }
  return reg;
}

inline PlantRegistry parse_registry(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_registry(in);
}

inline MonitorMap parse_monitor_map(std::istream& in) {
  MonitorMap map;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto cells = split_csv(line);
    if (!header) {
      header = true;
      continue;
    }
    if (cells.size() != 2 || cells[0].empty()) throw Error(ErrorCode::kParseError, "monitor map rows are monitor_id,plant_id", line_no);
    std::optional<std::string> plant;
    if (!cells[1].empty()) plant = std::string(cells[1]);
    if (!map.emplace(std::string(cells[0]), plant).second) {
      throw Error(ErrorCode::kParseError, "duplicate monitor '" + std::string(cells[0]) + "'", line_no);
    }
  }
  return map;
}

inline MonitorMap parse_monitor_map(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_monitor_map(in);
}

// ---------------------------------------------------------------------------
// ledger

// Accepts "YYYY-MM-DDTHH:MM:SSZ" (the 'T' may be a space, the 'Z' optional).
inline UtcSeconds parse_utc_timestamp(std::string_view s, std::size_t line = 0) {
  using namespace std::chrono;
  s = trim(s);
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
    if (ec != std::errc{} || p != s.data() + pos + len) {
      throw Error(ErrorCode::kParseError, "bad timestamp '" + std::string(s) + "'", line);
    }
    return v;
  };
  if (s.size() != 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
    throw Error(ErrorCode::kParseError, "bad timestamp '" + std::string(s) + "'", line);
  }
  const year_month_day ymd{year{field(0, 4)}, month{static_cast<unsigned>(field(5, 2))}, day{static_cast<unsigned>(field(8, 2))}};
  const int hh = field(11, 2), mm = field(14, 2), ss = field(17, 2);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
    throw Error(ErrorCode::kParseError, "invalid calendar time '" + std::string(s) + "'", line);
  }
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

inline std::string format_utc_timestamp(UtcSeconds t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

inline std::string format_date(const std::chrono::year_month_day& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

inline EventLedger parse_ledger(std::istream& in) {
  EventLedger ledger;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  constexpr std::string_view kOffset = "utc_offset_minutes=";
  while (std::getline(in, line)) {
    ++line_no;
    auto body = trim(line);
    if (!body.empty() && body.front() == '#') {
      body.remove_prefix(1);
      body = trim(body);
      if (body.substr(0, kOffset.size()) == kOffset) {
        ledger.utc_offset_minutes = static_cast<int>(parse_double(body.substr(kOffset.size()), line_no, "utc offset"));
      }
      continue;
    }
    if (body.empty()) continue;
    const auto cells = split_csv(body);
    if (!header) {
      header = true;
      continue;
    }
    if (cells.size() < 2 || cells.size() > 4) throw Error(ErrorCode::kParseError, "ledger rows need 2-4 columns", line_no);
    LedgerRecord r;
    r.t_event = parse_utc_timestamp(cells[0], line_no);
    r.plant_id = std::string(cells[1]);
    if (cells.size() > 2 && !cells[2].empty()) {
      r.mw_observed = parse_double(cells[2], line_no, "mw_observed");
      if (!(*r.mw_observed > 0.0)) throw Error(ErrorCode::kParseError, "mw_observed must be > 0", line_no);
    }
    if (cells.size() > 3 && !cells[3].empty()) r.h_estimate_mw_s = parse_double(cells[3], line_no, "h_estimate_mw_s");
    ledger.records.push_back(std::move(r));
  }
  return ledger;
}

inline EventLedger parse_ledger(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_ledger(in);
}

inline void write_ledger(std::ostream& out, const EventLedger& ledger) {
  out << "# utc_offset_minutes=" << ledger.utc_offset_minutes << '\n';
  out << "t_event_utc,plant_id,mw_observed,h_estimate_mw_s\n";
  for (const auto& r : ledger.records) {
    out << format_utc_timestamp(r.t_event) << ',' << r.plant_id << ',';
    if (r.mw_observed) out << format_number(*r.mw_observed);
    out << ',';
    if (r.h_estimate_mw_s) out << format_number(*r.h_estimate_mw_s);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON records

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where,
                                ErrorCode code) {
  if (!j.is_object()) throw Error(code, where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw Error(code, where + ": unknown field '" + key + "'");
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

}  // namespace detail

inline json candidate_to_json(const CandidateEvent& c) {
  return json{{"t_event_s", c.t_event},
              {"monitor_id", c.monitor_id},
              {"spike_rocof_hz_per_s", c.spike_rocof},
              {"v_step_pu", c.v_step},
              {"f_deviation_hz", c.f_deviation}};
}

inline CandidateEvent candidate_from_json(const json& j) {
  CandidateEvent c;
  c.t_event = j.at("t_event_s").get<double>();
  c.monitor_id = j.at("monitor_id").get<std::string>();
  c.spike_rocof = j.at("spike_rocof_hz_per_s").get<double>();
  c.v_step = j.at("v_step_pu").get<double>();
  c.f_deviation = j.at("f_deviation_hz").get<double>();
  return c;
}

inline json event_to_json(const ConfirmedEvent& e) {
  json features = json::object();
  for (const auto& [id, c] : e.features) features[id] = candidate_to_json(c);
  return json{{"t_event_s", e.t_event},
              {"monitor_ids", e.monitor_ids},
              {"plant_id", e.plant_id ? json(*e.plant_id) : json(nullptr)},
              {"features", features},
              {"diagnostics", e.diagnostics}};
}

inline ConfirmedEvent event_from_json(const json& j) {
  ConfirmedEvent e;
  e.t_event = j.at("t_event_s").get<double>();
  for (const auto& id : j.at("monitor_ids")) e.monitor_ids.insert(id.get<std::string>());
  if (j.contains("plant_id") && !j.at("plant_id").is_null()) e.plant_id = j.at("plant_id").get<std::string>();
  if (j.contains("features")) {
    for (const auto& [id, c] : j.at("features").items()) e.features.emplace(id, candidate_from_json(c));
  }
  if (j.contains("diagnostics")) e.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  if (e.monitor_ids.empty()) throw Error(ErrorCode::kParseError, "event without monitor_ids");
  return e;
}

inline json estimate_to_json(const InertiaEstimate& e) {
  json j{{"t_event_s", e.t_event},
         {"plant_id", e.plant_id},
         {"monitor_id", e.monitor_id},
         {"method", to_string(e.method)},
         {"delta_p_mw", e.delta_p},
         {"pre_rocof_hz_per_s", e.pre.slope},
         {"post_rocof_hz_per_s", e.post.slope},
         {"true_rocof_hz_per_s", e.true_rocof},
         {"rocof_used_hz_per_s", e.rocof_used},
         {"window_length_s", e.window_length},
         {"guard_s", e.guard},
         {"f0_hz", e.f0},
         {"h_mw_s", e.h_mw_s},
         {"h_pu_s", e.h_pu_s ? json(*e.h_pu_s) : json(nullptr)},
         {"quality",
          {{"pre_r_squared", e.pre.r_squared},
           {"post_r_squared", e.post.r_squared},
           {"pre_n_samples", e.pre.n_samples},
           {"post_n_samples", e.post.n_samples}}}};
  return j;
}

inline json detector_config_to_json(const DetectorConfig& c) {
  return json{{"rocof_spike_threshold_hz_per_s", c.rocof_spike_threshold},
              {"spike_window_s", c.spike_window},
              {"voltage_step_threshold_pu", c.voltage_step_threshold},
              {"voltage_settle_s", c.voltage_settle},
              {"voltage_span_s", c.voltage_span},
              {"deviation_threshold_hz", c.deviation_threshold},
              {"deviation_window_s", c.deviation_window},
              {"holdoff_s", c.holdoff},
              {"osc_cycle_min", c.osc_cycle_min},
              {"osc_band_hz", {c.osc_band.low_hz, c.osc_band.high_hz}},
              {"osc_window_s", c.osc_window},
              {"osc_hysteresis_hz", c.osc_hysteresis},
              {"fusion_window_s", c.fusion_window}};
}

inline DetectorConfig detector_config_from_json(const json& j) {
  detail::reject_unknown_keys(j,
                              {"rocof_spike_threshold_hz_per_s", "spike_window_s", "voltage_step_threshold_pu",
                               "voltage_settle_s", "voltage_span_s", "deviation_threshold_hz", "deviation_window_s",
                               "holdoff_s", "osc_cycle_min", "osc_band_hz", "osc_window_s", "osc_hysteresis_hz",
                               "fusion_window_s"},
                              "detector", ErrorCode::kInvalidConfig);
  DetectorConfig c;
  detail::read_opt(j, "rocof_spike_threshold_hz_per_s", c.rocof_spike_threshold);
  detail::read_opt(j, "spike_window_s", c.spike_window);
  detail::read_opt(j, "voltage_step_threshold_pu", c.voltage_step_threshold);
  detail::read_opt(j, "voltage_settle_s", c.voltage_settle);
  detail::read_opt(j, "voltage_span_s", c.voltage_span);
  detail::read_opt(j, "deviation_threshold_hz", c.deviation_threshold);
  detail::read_opt(j, "deviation_window_s", c.deviation_window);
  detail::read_opt(j, "holdoff_s", c.holdoff);
  detail::read_opt(j, "osc_cycle_min", c.osc_cycle_min);
  if (j.contains("osc_band_hz")) {
    const auto band = j.at("osc_band_hz").get<std::vector<double>>();
    if (band.size() != 2) throw Error(ErrorCode::kInvalidConfig, "osc_band_hz needs [low, high]");
    c.osc_band = {band[0], band[1]};
  }
  detail::read_opt(j, "osc_window_s", c.osc_window);
  detail::read_opt(j, "osc_hysteresis_hz", c.osc_hysteresis);
  detail::read_opt(j, "fusion_window_s", c.fusion_window);
  c.validate();
  return c;
}

inline json estimator_config_to_json(const EstimatorConfig& c) {
  return json{{"window_length_s", c.window_length},
              {"guard_s", c.guard},
              {"f0_hz", c.f0},
              {"min_abs_true_rocof_hz_per_s", c.min_abs_true_rocof},
              {"mva_base_mva", c.mva_base ? json(*c.mva_base) : json(nullptr)}};
}

inline EstimatorConfig estimator_config_from_json(const json& j) {
  detail::reject_unknown_keys(j, {"window_length_s", "guard_s", "f0_hz", "min_abs_true_rocof_hz_per_s", "mva_base_mva"},
                              "estimator", ErrorCode::kInvalidConfig);
  EstimatorConfig c;
  detail::read_opt(j, "window_length_s", c.window_length);
  detail::read_opt(j, "guard_s", c.guard);
  detail::read_opt(j, "f0_hz", c.f0);
  detail::read_opt(j, "min_abs_true_rocof_hz_per_s", c.min_abs_true_rocof);
  if (j.contains("mva_base_mva") && !j.at("mva_base_mva").is_null()) c.mva_base = j.at("mva_base_mva").get<double>();
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// scenario files (JSON, units in field names)

inline json scenario_to_json(const SimScenario& sc) {
  json events = json::array();
  for (const auto& e : sc.events) events.push_back({{"t_s", e.t_s}, {"delta_p_mw", e.delta_p_mw}, {"plant_id", e.plant_id}});
  json osc = json::array();
  for (const auto& o : sc.oscillations) {
    osc.push_back({{"freq_hz", o.freq_hz}, {"amp_hz", o.amp_hz}, {"v_amp_pu", o.v_amp_pu}, {"start_s", o.start_s},
                   {"duration_s", o.duration_s}});
  }
  json monitors = json::array();
  for (const auto& m : sc.monitors) {
    json jm{{"monitor_id", m.monitor_id},
            {"near_plant", m.near_plant ? json(*m.near_plant) : json(nullptr)},
            {"gap", m.gap ? json{{"start_s", m.gap->start_s}, {"length_s", m.gap->length_s}} : json(nullptr)},
            {"spike_amp_hz", m.spike_amp_hz},
            {"v_step_pu", m.v_step_pu},
            {"v_noise_pu", m.v_noise_pu},
            {"f_noise_hz", m.f_noise_hz},
            {"v_nominal_pu", m.v_nominal_pu},
            {"has_voltage", m.has_voltage}};
    monitors.push_back(std::move(jm));
  }
  return json{{"h_true_mw_s", sc.h_true_mw_s},
              {"f0_hz", sc.f0_hz},
              {"damping_mw_per_hz", sc.damping_mw_per_hz},
              {"governor",
               {{"enabled", sc.governor.enabled},
                {"droop_mw_per_hz", sc.governor.droop_mw_per_hz},
                {"time_constant_s", sc.governor.time_constant_s}}},
              {"noise",
               {{"std_mw", sc.noise.std_mw},
                {"correlation_time_s", sc.noise.correlation_time_s},
                {"seed", sc.noise.seed}}},
              {"events", events},
              {"pre_ramp_mw", sc.pre_ramp_mw},
              {"ramp_start_s", sc.ramp_start_s},
              {"oscillations", osc},
              {"monitors", monitors},
              {"duration_s", sc.duration_s},
              {"sample_rate_hz", sc.sample_rate_hz},
              {"internal_steps_per_sample", sc.internal_steps_per_sample},
              {"voltage_recovery_s", sc.voltage_recovery_s}};
}

inline SimScenario scenario_from_json(const json& j) {
  constexpr auto bad = ErrorCode::kInvalidScenario;
  try {
    detail::reject_unknown_keys(j,
                                {"h_true_mw_s", "f0_hz", "damping_mw_per_hz", "governor", "noise", "events", "pre_ramp_mw",
                                 "ramp_start_s", "oscillations", "monitors", "duration_s", "sample_rate_hz",
                                 "internal_steps_per_sample", "voltage_recovery_s"},
                                "scenario", bad);
    SimScenario sc;
    detail::read_opt(j, "h_true_mw_s", sc.h_true_mw_s);
    detail::read_opt(j, "f0_hz", sc.f0_hz);
    detail::read_opt(j, "damping_mw_per_hz", sc.damping_mw_per_hz);
    if (j.contains("governor") && !j.at("governor").is_null()) {
      const auto& g = j.at("governor");
      detail::reject_unknown_keys(g, {"enabled", "droop_mw_per_hz", "time_constant_s"}, "governor", bad);
      detail::read_opt(g, "enabled", sc.governor.enabled);
      detail::read_opt(g, "droop_mw_per_hz", sc.governor.droop_mw_per_hz);
      detail::read_opt(g, "time_constant_s", sc.governor.time_constant_s);
    }
    if (j.contains("noise") && !j.at("noise").is_null()) {
      const auto& n = j.at("noise");
      detail::reject_unknown_keys(n, {"std_mw", "correlation_time_s", "seed"}, "noise", bad);
      detail::read_opt(n, "std_mw", sc.noise.std_mw);
      detail::read_opt(n, "correlation_time_s", sc.noise.correlation_time_s);
      detail::read_opt(n, "seed", sc.noise.seed);
    }
    if (j.contains("events")) {
      for (const auto& je : j.at("events")) {
        detail::reject_unknown_keys(je, {"t_s", "delta_p_mw", "plant_id"}, "events[]", bad);
        sc.events.push_back({je.at("t_s").get<double>(), je.at("delta_p_mw").get<double>(),
                             je.value("plant_id", std::string{})});
      }
    }
    detail::read_opt(j, "pre_ramp_mw", sc.pre_ramp_mw);
    detail::read_opt(j, "ramp_start_s", sc.ramp_start_s);
    if (j.contains("oscillations")) {
      for (const auto& jo : j.at("oscillations")) {
        detail::reject_unknown_keys(jo, {"freq_hz", "amp_hz", "v_amp_pu", "start_s", "duration_s"}, "oscillations[]", bad);
        OscillationSpec o;
        detail::read_opt(jo, "freq_hz", o.freq_hz);
        detail::read_opt(jo, "amp_hz", o.amp_hz);
        detail::read_opt(jo, "v_amp_pu", o.v_amp_pu);
        detail::read_opt(jo, "start_s", o.start_s);
        detail::read_opt(jo, "duration_s", o.duration_s);
        sc.oscillations.push_back(o);
      }
    }
    if (j.contains("monitors")) {
      for (const auto& jm : j.at("monitors")) {
        detail::reject_unknown_keys(jm,
                                    {"monitor_id", "near_plant", "gap", "spike_amp_hz", "v_step_pu", "v_noise_pu",
                                     "f_noise_hz", "v_nominal_pu", "has_voltage"},
                                    "monitors[]", bad);
        MonitorSpec m;
        m.monitor_id = jm.at("monitor_id").get<std::string>();
        if (jm.contains("near_plant") && !jm.at("near_plant").is_null()) m.near_plant = jm.at("near_plant").get<std::string>();
        if (jm.contains("gap") && !jm.at("gap").is_null()) {
          m.gap = DataGap{jm.at("gap").at("start_s").get<double>(), jm.at("gap").at("length_s").get<double>()};
        }
        detail::read_opt(jm, "spike_amp_hz", m.spike_amp_hz);
        detail::read_opt(jm, "v_step_pu", m.v_step_pu);
        detail::read_opt(jm, "v_noise_pu", m.v_noise_pu);
        detail::read_opt(jm, "f_noise_hz", m.f_noise_hz);
        detail::read_opt(jm, "v_nominal_pu", m.v_nominal_pu);
        detail::read_opt(jm, "has_voltage", m.has_voltage);
        sc.monitors.push_back(std::move(m));
      }
    }
    detail::read_opt(j, "duration_s", sc.duration_s);
    detail::read_opt(j, "sample_rate_hz", sc.sample_rate_hz);
    detail::read_opt(j, "internal_steps_per_sample", sc.internal_steps_per_sample);
    detail::read_opt(j, "voltage_recovery_s", sc.voltage_recovery_s);
    sc.validate();
    return sc;
  } catch (const json::exception& e) {
    throw Error(bad, e.what());
  }
}

inline json read_json_file(const std::filesystem::path& path, ErrorCode on_error) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(on_error, path.string() + ": " + e.what());
  }
}

inline SimScenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_json_file(path, ErrorCode::kInvalidScenario));
}

inline json truth_to_json(const SimTruth& t) {
  json events = json::array();
  for (const auto& e : t.events) {
    events.push_back({{"t_s", e.t_s},
                      {"delta_p_mw", e.delta_p_mw},
                      {"plant_id", e.plant_id},
                      {"event_rocof_hz_per_s", e.event_rocof_hz_per_s},
                      {"pre_event_rocof_hz_per_s", e.pre_event_rocof_hz_per_s}});
  }
  json osc = json::array();
  for (const auto& o : t.oscillations) osc.push_back({{"start_s", o.start_s}, {"duration_s", o.duration_s}, {"freq_hz", o.freq_hz}});
  return json{{"h_true_mw_s", t.h_true_mw_s}, {"f0_hz", t.f0_hz}, {"events", events}, {"oscillations", osc}};
}

// ---------------------------------------------------------------------------
// analytics reports

inline json mw_step_stats_to_json(const MwStepStats& s) {
  return json{{"count", s.count},
              {"mean_mw", s.mean_mw},
              {"min_mw", s.min_mw},
              {"max_mw", s.max_mw},
              {"max_abs_deviation_ratio", s.max_abs_deviation_ratio},
              {"mean_abs_deviation_ratio", s.mean_abs_deviation_ratio},
              {"histogram", {{"first_edge_mw", s.histogram.first_edge}, {"bin_width_mw", s.histogram.bin_width}, {"counts", s.histogram.counts}}}};
}

inline json monthly_to_json(const std::vector<MonthlyMw>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    char ym[16];
    std::snprintf(ym, sizeof(ym), "%04d-%02u", r.year, r.month);
    out.push_back({{"month", ym}, {"count", r.count}, {"max_mw", r.max_mw}, {"mean_mw", r.mean_mw}, {"min_mw", r.min_mw}});
  }
  return out;
}

inline json daily_to_json(const DailyCounts& d) {
  json days = json::array();
  for (const auto& dc : d.days) days.push_back({{"date", format_date(dc.day)}, {"count", dc.count}});
  return json{{"mean_per_day", d.mean_per_day}, {"max_per_day", d.max_per_day}, {"total", d.total},
              {"span_days", d.days.size()}, {"days", days}};
}

inline json time_of_day_to_json(const TimeOfDayProfile& p) {
  json j{{"hourly_counts", p.hourly},
         {"modal_span", {{"start_hour", p.modal_span.start_hour}, {"end_hour", p.modal_span.end_hour}}},
         {"modal_span_count", p.modal_span_count}};
  if (p.comparison) {
    j["low_inertia_comparison"] = {
        {"low_inertia_span", {{"start_hour", p.comparison->low_inertia.start_hour}, {"end_hour", p.comparison->low_inertia.end_hour}}},
        {"overlap_hours", p.comparison->overlap_hours},
        {"overlap", p.comparison->overlap ? "yes" : "no"},
        {"contained", p.comparison->contained}};
  }
  return j;
}

}  // namespace inertiamon
