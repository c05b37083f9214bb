#pragma once

// Numeric kernels shared by the detector, the estimator and the analytics:
// least-squares RoCoF, median voltage step, frequency deviation, detrending.
// Every kernel works on timestamps, never on sample indices, so any reporting
// rate is accepted.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inertiamon/error.hpp"

namespace inertiamon {

// Window edges are compared with this slack so that boundaries computed as
// t_event + guard land on the intended side of a sample at the same instant.
inline constexpr double kTimeEpsilon = 1e-9;

struct TimedSample {
  double t = 0.0;               // seconds since stream epoch
  double f = 0.0;               // Hz
  std::optional<double> v;      // per-unit, absent when not measured

  friend bool operator==(const TimedSample&, const TimedSample&) = default;
};

struct SensorStream {
  std::string monitor_id;
  std::vector<TimedSample> samples;  // strictly increasing in t

  bool has_voltage() const {
    return std::any_of(samples.begin(), samples.end(),
                       [](const TimedSample& s) { return s.v.has_value(); });
  }
  bool empty() const { return samples.empty(); }
  double front_time() const { return samples.front().t; }
  double back_time() const { return samples.back().t; }

  friend bool operator==(const SensorStream&, const SensorStream&) = default;
};

enum class WindowEdges {
  kClosedOpen,  // start <= t < end
  kOpenClosed,  // start < t <= end
};

struct Window {
  double start = 0.0;
  double length = 0.0;
  WindowEdges edges = WindowEdges::kClosedOpen;

  double end() const { return start + length; }

  bool contains(double t) const {
    if (edges == WindowEdges::kClosedOpen) {
      return t >= start - kTimeEpsilon && t < end() - kTimeEpsilon;
    }
    return t > start + kTimeEpsilon && t <= end() + kTimeEpsilon;
  }
};

struct RocofValue {
  double slope = 0.0;         // Hz/s
  std::size_t n_samples = 0;
  double r_squared = 1.0;
};

namespace detail {

inline void check_window(const Window& w) {
  if (!(w.length > 0.0) || !std::isfinite(w.start) || !std::isfinite(w.length)) {
    throw Error(ErrorCode::kInvalidConfig, "window length must be positive and finite");
  }
}

// Median of a scratch buffer; the buffer is reordered.
inline double median_inplace(std::vector<double>& values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  double upper = *mid;
  if (n % 2 == 1) return upper;
  double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace detail

inline double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kWindowTooSparse, "median of empty set");
  return detail::median_inplace(values);
}

// Samples of a sorted stream that fall inside the window.
inline std::span<const TimedSample> select(const SensorStream& stream, const Window& w) {
  detail::check_window(w);
  const auto& s = stream.samples;
  const bool closed_open = w.edges == WindowEdges::kClosedOpen;
  auto first = std::partition_point(s.begin(), s.end(), [&](const TimedSample& x) {
    return closed_open ? x.t < w.start - kTimeEpsilon : x.t <= w.start + kTimeEpsilon;
  });
  auto last = std::partition_point(first, s.end(), [&](const TimedSample& x) {
    return closed_open ? x.t < w.end() - kTimeEpsilon : x.t <= w.end() + kTimeEpsilon;
  });
  return {first, last};
}

// Ordinary least-squares slope of f against t. Uses centred sums, so the
// result does not depend on the absolute time origin.
inline RocofValue rocof(std::span<const TimedSample> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw Error(ErrorCode::kWindowTooSparse, std::to_string(n) + " sample(s) in RoCoF window");
  double t_mean = 0.0;
  double f_mean = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.f) || !std::isfinite(s.t)) throw Error(ErrorCode::kNonFinite, "non-finite sample in RoCoF window");
    t_mean += s.t;
    f_mean += s.f;
  }
  t_mean /= static_cast<double>(n);
  f_mean /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& s : samples) {
    const double dt = s.t - t_mean;
    const double df = s.f - f_mean;
    sxx += dt * dt;
    sxy += dt * df;
    syy += df * df;
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::kWindowTooSparse, "RoCoF window has no time spread");
  RocofValue out;
  out.slope = sxy / sxx;
  out.n_samples = n;
  out.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return out;
}

inline RocofValue rocof(const SensorStream& stream, const Window& window) {
  return rocof(select(stream, window));
}

// Background-corrected event RoCoF: the post-event slope with the pre-event
// drift removed.
inline double true_event_rocof(const RocofValue& pre, const RocofValue& post) {
  return post.slope - pre.slope;
}

// Signed voltage step around t_event: median of v over
// [t_event + settle, t_event + settle + span] minus the median over
// [t_event - settle - span, t_event - settle].
inline double voltage_step(const SensorStream& stream, double t_event, double settle, double span) {
  if (!stream.has_voltage()) {
    throw Error(ErrorCode::kMissingVoltage, "stream '" + stream.monitor_id + "' has no voltage channel");
  }
  auto collect = [&](double lo, double hi) {
    std::vector<double> values;
    auto it = std::lower_bound(stream.samples.begin(), stream.samples.end(), lo - kTimeEpsilon,
                               [](const TimedSample& s, double t) { return s.t < t; });
    for (; it != stream.samples.end() && it->t <= hi + kTimeEpsilon; ++it) {
      if (!it->v) continue;
      if (!std::isfinite(*it->v)) throw Error(ErrorCode::kNonFinite, "non-finite voltage sample");
      values.push_back(*it->v);
    }
    if (values.size() < 3) {
      throw Error(ErrorCode::kWindowTooSparse, std::to_string(values.size()) + " voltage sample(s) in step span");
    }
    return values;
  };
  auto before = collect(t_event - settle - span, t_event - settle);
  auto after = collect(t_event + settle, t_event + settle + span);
  return detail::median_inplace(after) - detail::median_inplace(before);
}

// Largest |f - f_ref| over the window, where f_ref is the median frequency of
// the leading 20% of the window (or the first sample when that part is empty).
inline double max_frequency_deviation(const SensorStream& stream, const Window& window) {
  auto samples = select(stream, window);
  if (samples.size() < 2) {
    throw Error(ErrorCode::kWindowTooSparse, std::to_string(samples.size()) + " sample(s) in deviation window");
  }
  const Window lead{window.start, 0.2 * window.length, window.edges};
  std::vector<double> ref_values;
  for (const auto& s : samples) {
    if (!lead.contains(s.t)) break;
    ref_values.push_back(s.f);
  }
  const double f_ref = ref_values.empty() ? samples.front().f : detail::median_inplace(ref_values);
  double worst = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.f)) throw Error(ErrorCode::kNonFinite, "non-finite frequency sample");
    worst = std::max(worst, std::abs(s.f - f_ref));
  }
  return worst;
}

// Residuals of f about its least-squares line over the window.
inline std::vector<double> detrend(std::span<const TimedSample> samples) {
  if (samples.size() < 3) {
    throw Error(ErrorCode::kWindowTooSparse, std::to_string(samples.size()) + " sample(s) in detrend window");
  }
  const RocofValue fit = rocof(samples);
  double t_mean = 0.0;
  double f_mean = 0.0;
  for (const auto& s : samples) {
    t_mean += s.t;
    f_mean += s.f;
  }
  t_mean /= static_cast<double>(samples.size());
  f_mean /= static_cast<double>(samples.size());
  std::vector<double> residuals;
  residuals.reserve(samples.size());
  for (const auto& s : samples) residuals.push_back(s.f - (f_mean + fit.slope * (s.t - t_mean)));
  return residuals;
}

inline std::vector<double> detrend(const SensorStream& stream, const Window& window) {
  return detrend(select(stream, window));
}

}  // namespace inertiamon
