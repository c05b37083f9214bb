#pragma once

// Swing-equation inertia estimate from one pump switching-off event:
//
//   H = f0 * dP / (2 * |RoCoF|)
//
// The improved estimate uses the post-event slope minus the pre-event slope;
// the traditional one uses the post-event slope alone. Both fits sit outside a
// guard gap around the event so the local frequency spike is excluded.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "inertiamon/error.hpp"
#include "inertiamon/event_detector.hpp"
#include "inertiamon/plant.hpp"
#include "inertiamon/signal_kernel.hpp"

namespace inertiamon {

struct EstimatorConfig {
  double window_length = 0.3;         // s
  double guard = 0.1;                 // s
  double f0 = 60.0;                   // Hz
  double min_abs_true_rocof = 0.001;  // Hz/s
  std::optional<double> mva_base;     // enables h_pu_s

  void validate() const {
    if (!(window_length > 0.0)) throw Error(ErrorCode::kInvalidConfig, "window_length must be > 0");
    if (!(guard >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "guard must be >= 0");
    if (!(f0 > 0.0)) throw Error(ErrorCode::kInvalidConfig, "f0 must be > 0");
    if (!(min_abs_true_rocof > 0.0)) throw Error(ErrorCode::kInvalidConfig, "min_abs_true_rocof must be > 0");
    if (mva_base && !(*mva_base > 0.0)) throw Error(ErrorCode::kInvalidConfig, "mva_base must be > 0");
  }
};

enum class EstimateMethod { kImproved, kTraditional };

inline const char* to_string(EstimateMethod m) {
  return m == EstimateMethod::kImproved ? "improved" : "traditional";
}

struct InertiaEstimate {
  double t_event = 0.0;
  std::string plant_id;
  std::string monitor_id;
  EstimateMethod method = EstimateMethod::kImproved;
  double delta_p = 0.0;     // MW, positive for a load loss
  RocofValue pre;           // signed, for audit
  RocofValue post;
  double true_rocof = 0.0;  // Hz/s, post - pre
  double rocof_used = 0.0;  // Hz/s, the slope fed into the swing equation
  double window_length = 0.0;
  double guard = 0.0;
  double f0 = 60.0;
  double h_mw_s = 0.0;
  std::optional<double> h_pu_s;  // h_mw_s / mva_base
};

namespace detail {

inline InertiaEstimate estimate_with(const ConfirmedEvent& event, const SensorStream& stream,
                                     const PlantSignature& sig, const EstimatorConfig& cfg,
                                     EstimateMethod method) {
  cfg.validate();
  sig.validate();
  if (event.plant_id && *event.plant_id != sig.plant_id) {
    throw Error(ErrorCode::kPlantMismatch, "event attributed to '" + *event.plant_id + "', signature is '" + sig.plant_id + "'");
  }
  const double t = event.t_event;
  const double len = cfg.window_length;
  const Window pre_window{t - cfg.guard - len, len, WindowEdges::kClosedOpen};
  const Window post_window{t + cfg.guard, len, WindowEdges::kOpenClosed};

  InertiaEstimate est;
  est.t_event = t;
  est.plant_id = sig.plant_id;
  est.monitor_id = stream.monitor_id;
  est.method = method;
  est.delta_p = sig.mw_step_mean_mw;
  est.window_length = len;
  est.guard = cfg.guard;
  est.f0 = cfg.f0;
  try {
    est.pre = rocof(stream, pre_window);
    est.post = rocof(stream, post_window);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kWindowTooSparse) throw Error(ErrorCode::kInsufficientData, e.detail());
    throw;
  }
  est.true_rocof = true_event_rocof(est.pre, est.post);
  est.rocof_used = method == EstimateMethod::kImproved ? est.true_rocof : est.post.slope;
  if (std::abs(est.rocof_used) < cfg.min_abs_true_rocof) {
    throw Error(ErrorCode::kRocofBelowFloor,
                "|rocof| = " + std::to_string(std::abs(est.rocof_used)) + " Hz/s below floor");
  }
  est.h_mw_s = cfg.f0 * est.delta_p / (2.0 * std::abs(est.rocof_used));
  if (cfg.mva_base) est.h_pu_s = est.h_mw_s / *cfg.mva_base;
  return est;
}

}  // namespace detail

inline InertiaEstimate estimate(const ConfirmedEvent& event, const SensorStream& stream, const PlantSignature& sig,
                                const EstimatorConfig& cfg) {
  return detail::estimate_with(event, stream, sig, cfg, EstimateMethod::kImproved);
}

inline InertiaEstimate traditional_estimate(const ConfirmedEvent& event, const SensorStream& stream,
                                            const PlantSignature& sig, const EstimatorConfig& cfg) {
  return detail::estimate_with(event, stream, sig, cfg, EstimateMethod::kTraditional);
}

inline double error_rate(double h_est, double h_true) {
  if (!(h_true > 0.0)) throw Error(ErrorCode::kNonPositiveTruth, "h_true must be > 0");
  return std::abs(h_est - h_true) / h_true;
}

// Relative error the post-only method carries from a background slope:
// |pre / post|, which equals error_rate(traditional H, improved H).
inline double pre_event_contamination(double pre_rocof, double post_rocof) {
  return std::abs(pre_rocof / post_rocof);
}

inline constexpr std::array<double, 9> kDefaultSweepWindows{0.1, 0.2, 0.3, 0.4, 0.5, 1.0, 2.0, 3.0, 4.0};

struct SweepEntry {
  double window_length = 0.0;
  std::optional<InertiaEstimate> estimate;
  std::optional<ErrorCode> failure;
  std::string failure_message;
};

// One improved estimate per window length. Windows that fail are recorded and
// the sweep carries on.
inline std::vector<SweepEntry> window_sweep(const ConfirmedEvent& event, const SensorStream& stream,
                                            const PlantSignature& sig, const EstimatorConfig& cfg,
                                            std::span<const double> windows = kDefaultSweepWindows) {
  std::vector<SweepEntry> table;
  table.reserve(windows.size());
  for (double w : windows) {
    EstimatorConfig local = cfg;
    local.window_length = w;
    SweepEntry entry;
    entry.window_length = w;
    try {
      entry.estimate = estimate(event, stream, sig, local);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInvalidConfig || e.code() == ErrorCode::kPlantMismatch) throw;
      entry.failure = e.code();
      entry.failure_message = e.detail();
    }
    table.push_back(std::move(entry));
  }
  return table;
}

}  // namespace inertiamon
