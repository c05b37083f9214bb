#pragma once

// Batch statistics over a ledger of pump switching-off events: MW step
// constancy, monthly MW profile, daily counts and the time-of-day profile.
// Timestamps are stored in UTC; calendar grouping happens in the ledger's
// display offset.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "inertiamon/error.hpp"

namespace inertiamon {

using UtcSeconds = std::chrono::sys_seconds;

struct LedgerRecord {
  UtcSeconds t_event{};
  std::string plant_id;
  std::optional<double> mw_observed;
  std::optional<double> h_estimate_mw_s;
};

struct EventLedger {
  std::vector<LedgerRecord> records;
  int utc_offset_minutes = 0;  // display timezone

  std::chrono::local_seconds to_local(UtcSeconds t) const {
    return std::chrono::local_seconds{t.time_since_epoch()} + std::chrono::minutes{utc_offset_minutes};
  }
};

namespace detail {

inline std::vector<const LedgerRecord*> plant_records(const EventLedger& ledger, const std::string& plant_id) {
  std::vector<const LedgerRecord*> out;
  for (const auto& r : ledger.records) {
    if (r.plant_id == plant_id) out.push_back(&r);
  }
  return out;
}

// Observed MW values sorted ascending, so every sum below is independent of
// record order.
inline std::vector<double> sorted_mw(const EventLedger& ledger, const std::string& plant_id) {
  std::vector<double> mw;
  for (const auto* r : plant_records(ledger, plant_id)) {
    if (r->mw_observed) mw.push_back(*r->mw_observed);
  }
  std::sort(mw.begin(), mw.end());
  return mw;
}

inline double sorted_mean(const std::vector<double>& sorted) {
  return std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
}

}  // namespace detail

struct Histogram {
  double first_edge = 0.0;
  double bin_width = 0.0;
  std::vector<std::size_t> counts;

  double edge(std::size_t i) const { return first_edge + bin_width * static_cast<double>(i); }
};

struct MwStepStats {
  std::size_t count = 0;
  double mean_mw = 0.0;
  double min_mw = 0.0;
  double max_mw = 0.0;
  double max_abs_deviation_ratio = 0.0;
  double mean_abs_deviation_ratio = 0.0;
  Histogram histogram;
};

inline MwStepStats mw_step_stats(const EventLedger& ledger, const std::string& plant_id, double bin_width = 5.0) {
  if (!(bin_width > 0.0)) throw Error(ErrorCode::kInvalidConfig, "bin_width must be > 0");
  const auto mw = detail::sorted_mw(ledger, plant_id);
  if (mw.size() < 2) {
    throw Error(ErrorCode::kInsufficientRecords, plant_id + ": " + std::to_string(mw.size()) + " record(s) with observed MW");
  }
  MwStepStats st;
  st.count = mw.size();
  st.mean_mw = detail::sorted_mean(mw);
  st.min_mw = mw.front();
  st.max_mw = mw.back();
  std::vector<double> ratios;
  ratios.reserve(mw.size());
  for (double x : mw) ratios.push_back(std::abs(x - st.mean_mw) / st.mean_mw);
  std::sort(ratios.begin(), ratios.end());
  st.max_abs_deviation_ratio = ratios.back();
  st.mean_abs_deviation_ratio = detail::sorted_mean(ratios);

  st.histogram.bin_width = bin_width;
  st.histogram.first_edge = std::floor(st.min_mw / bin_width) * bin_width;
  const auto n_bins = static_cast<std::size_t>(std::floor((st.max_mw - st.histogram.first_edge) / bin_width)) + 1;
  st.histogram.counts.assign(n_bins, 0);
  for (double x : mw) {
    auto bin = static_cast<std::size_t>(std::floor((x - st.histogram.first_edge) / bin_width));
    ++st.histogram.counts[std::min(bin, n_bins - 1)];
  }
  return st;
}

struct MonthlyMw {
  int year = 0;
  unsigned month = 0;
  std::size_t count = 0;
  double max_mw = 0.0;
  double mean_mw = 0.0;
  double min_mw = 0.0;
};

// Months without observations are absent from the result.
inline std::vector<MonthlyMw> monthly_mw_profile(const EventLedger& ledger, const std::string& plant_id) {
  using namespace std::chrono;
  std::map<std::pair<int, unsigned>, std::vector<double>> groups;
  std::size_t total = 0;
  for (const auto* r : detail::plant_records(ledger, plant_id)) {
    if (!r->mw_observed) continue;
    const year_month_day ymd{floor<days>(ledger.to_local(r->t_event))};
    groups[{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())}].push_back(*r->mw_observed);
    ++total;
  }
  if (total < 2) {
    throw Error(ErrorCode::kInsufficientRecords, plant_id + ": " + std::to_string(total) + " record(s) with observed MW");
  }
  std::vector<MonthlyMw> out;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    out.push_back({key.first, key.second, values.size(), values.back(), detail::sorted_mean(values), values.front()});
  }
  return out;
}

struct DayCount {
  std::chrono::year_month_day day;
  std::size_t count = 0;
};

struct DailyCounts {
  std::vector<DayCount> days;  // every day of the span, zero-count days included
  double mean_per_day = 0.0;
  std::size_t max_per_day = 0;
  std::size_t total = 0;
};

// The span defaults to first..last event day (local, inclusive); an explicit
// span widens it, e.g. to a whole calendar year.
inline DailyCounts daily_event_counts(const EventLedger& ledger, const std::string& plant_id,
                                      std::optional<std::pair<std::chrono::sys_days, std::chrono::sys_days>> span = {}) {
  using namespace std::chrono;
  DailyCounts out;
  std::map<sys_days, std::size_t> counts;
  for (const auto* r : detail::plant_records(ledger, plant_id)) {
    const sys_days day{floor<days>(ledger.to_local(r->t_event)).time_since_epoch()};
    ++counts[day];
  }
  if (counts.empty() && !span) return out;
  sys_days first = counts.empty() ? span->first : counts.begin()->first;
  sys_days last = counts.empty() ? span->second : counts.rbegin()->first;
  if (span) {
    first = std::min(first, span->first);
    last = std::max(last, span->second);
  }
  for (sys_days d = first; d <= last; d += days{1}) {
    auto it = counts.find(d);
    const std::size_t c = it == counts.end() ? 0 : it->second;
    out.days.push_back({year_month_day{d}, c});
    out.total += c;
    out.max_per_day = std::max(out.max_per_day, c);
  }
  out.mean_per_day = static_cast<double>(out.total) / static_cast<double>(out.days.size());
  return out;
}

struct HourSpan {
  int start_hour = 0;  // inclusive
  int end_hour = 0;    // exclusive; wraps past midnight when <= start_hour

  bool contains(int hour) const {
    if (start_hour < end_hour) return hour >= start_hour && hour < end_hour;
    return hour >= start_hour || hour < end_hour;
  }
};

struct SpanOverlap {
  HourSpan low_inertia;
  int overlap_hours = 0;
  bool overlap = false;    // modal span intersects the supplied span
  bool contained = false;  // modal span lies entirely inside it
};

struct TimeOfDayProfile {
  std::array<std::size_t, 24> hourly{};
  HourSpan modal_span;  // busiest 3-hour span, earliest start on ties
  std::size_t modal_span_count = 0;
  std::optional<SpanOverlap> comparison;
};

inline TimeOfDayProfile time_of_day_profile(const EventLedger& ledger, const std::string& plant_id,
                                            std::optional<HourSpan> low_inertia_span = {}) {
  using namespace std::chrono;
  TimeOfDayProfile p;
  for (const auto* r : detail::plant_records(ledger, plant_id)) {
    const auto local = ledger.to_local(r->t_event);
    const auto hour = duration_cast<hours>(local - floor<days>(local)).count();
    ++p.hourly[static_cast<std::size_t>(hour)];
  }
  for (int h = 0; h < 24; ++h) {
    std::size_t c = 0;
    for (int k = 0; k < 3; ++k) c += p.hourly[static_cast<std::size_t>((h + k) % 24)];
    if (c > p.modal_span_count) {
      p.modal_span_count = c;
      p.modal_span = {h, (h + 3) % 24};
    }
  }
  if (p.modal_span_count == 0) p.modal_span = {0, 3};
  if (low_inertia_span) {
    SpanOverlap cmp;
    cmp.low_inertia = *low_inertia_span;
    for (int k = 0; k < 3; ++k) {
      if (low_inertia_span->contains((p.modal_span.start_hour + k) % 24)) ++cmp.overlap_hours;
    }
    cmp.overlap = cmp.overlap_hours > 0;
    cmp.contained = cmp.overlap_hours == 3;
    p.comparison = cmp;
  }
  return p;
}

}  // namespace inertiamon
