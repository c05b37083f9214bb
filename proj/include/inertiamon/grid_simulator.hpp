#pragma once

// Aggregate single-machine frequency model used as ground truth:
//
//   (2H / f0) d(df)/dt = P_net(t) - D * df - P_gov
//   T_gov dP_gov/dt    = R * df - P_gov            (optional droop governor)
//
// P_net holds the event steps, a constant pre-event imbalance (which produces
// a background RoCoF) and exponentially correlated load noise. The model is
// integrated with explicit Euler on a fine grid and decimated to the reporting
// rate. Monitors near the tripping plant additionally see a one-sample
// frequency spike and a voltage step.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "inertiamon/error.hpp"
#include "inertiamon/parallel.hpp"
#include "inertiamon/signal_kernel.hpp"

namespace inertiamon {

struct GovernorConfig {
  bool enabled = false;
  double droop_mw_per_hz = 0.0;
  double time_constant_s = 5.0;
};

struct NoiseConfig {
  double std_mw = 0.0;
  double correlation_time_s = 3.0;
  std::uint64_t seed = 1;
};

struct SimEvent {
  double t_s = 0.0;
  double delta_p_mw = 0.0;  // positive = load loss, frequency rises
  std::string plant_id;
};

// Injected additive oscillation, enveloped to grow linearly from zero to the
// full amplitude over its duration. Applied to every monitor.
struct OscillationSpec {
  double freq_hz = 0.5;
  double amp_hz = 0.0;
  double v_amp_pu = 0.0;
  double start_s = 0.0;
  double duration_s = 0.0;
};

struct DataGap {
  double start_s = 0.0;
  double length_s = 0.0;
};

struct MonitorSpec {
  std::string monitor_id;
  std::optional<std::string> near_plant;
  std::optional<DataGap> gap;
  double spike_amp_hz = 0.06;
  double v_step_pu = 0.01;
  double v_noise_pu = 0.0;
  double f_noise_hz = 0.0;  // white measurement noise on frequency
  double v_nominal_pu = 1.0;
  bool has_voltage = true;
};

struct SimScenario {
  double h_true_mw_s = 100000.0;
  double f0_hz = 60.0;
  double damping_mw_per_hz = 0.0;
  GovernorConfig governor;
  NoiseConfig noise;
  std::vector<SimEvent> events;
  double pre_ramp_mw = 0.0;   // constant imbalance switched on at ramp_start_s
  double ramp_start_s = 0.0;
  std::vector<OscillationSpec> oscillations;
  std::vector<MonitorSpec> monitors;
  double duration_s = 60.0;
  double sample_rate_hz = 10.0;
  int internal_steps_per_sample = 10;
  double voltage_recovery_s = 120.0;  // local voltage steps decay with this time constant

  // Throws InvalidScenario listing every offending field.
  void validate() const {
    std::vector<std::string> bad;
    auto need = [&](bool ok, const std::string& msg) {
      if (!ok) bad.push_back(msg);
    };
    need(h_true_mw_s > 0.0 && std::isfinite(h_true_mw_s), "h_true_mw_s: must be > 0");
    need(f0_hz > 0.0, "f0_hz: must be > 0");
    need(damping_mw_per_hz >= 0.0, "damping_mw_per_hz: must be >= 0");
    need(duration_s > 0.0 && std::isfinite(duration_s), "duration_s: must be > 0");
    need(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz), "sample_rate_hz: must be > 0");
    need(internal_steps_per_sample >= 1, "internal_steps_per_sample: must be >= 1");
    need(voltage_recovery_s > 0.0, "voltage_recovery_s: must be > 0");
    need(noise.std_mw >= 0.0, "noise.std_mw: must be >= 0");
    need(noise.correlation_time_s > 0.0, "noise.correlation_time_s: must be > 0");
    if (governor.enabled) {
      need(governor.droop_mw_per_hz >= 0.0, "governor.droop_mw_per_hz: must be >= 0");
      need(governor.time_constant_s > 0.0, "governor.time_constant_s: must be > 0");
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& e = events[i];
      need(e.t_s >= 0.0 && e.t_s < duration_s, "events[" + std::to_string(i) + "].t_s: outside [0, duration_s)");
      need(std::isfinite(e.delta_p_mw), "events[" + std::to_string(i) + "].delta_p_mw: must be finite");
    }
    for (std::size_t i = 0; i < oscillations.size(); ++i) {
      const auto& o = oscillations[i];
      need(o.freq_hz > 0.0, "oscillations[" + std::to_string(i) + "].freq_hz: must be > 0");
      need(o.duration_s > 0.0, "oscillations[" + std::to_string(i) + "].duration_s: must be > 0");
    }
    need(!monitors.empty(), "monitors: at least one monitor required");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < monitors.size(); ++i) {
      const auto& m = monitors[i];
      need(!m.monitor_id.empty(), "monitors[" + std::to_string(i) + "].monitor_id: empty");
      need(ids.insert(m.monitor_id).second, "monitors[" + std::to_string(i) + "].monitor_id: duplicate '" + m.monitor_id + "'");
      need(m.v_noise_pu >= 0.0 && m.f_noise_hz >= 0.0, "monitors[" + std::to_string(i) + "]: noise must be >= 0");
      if (m.gap) need(m.gap->length_s > 0.0, "monitors[" + std::to_string(i) + "].gap.length_s: must be > 0");
    }
    if (!bad.empty()) {
      std::string msg;
      for (const auto& b : bad) msg += (msg.empty() ? "" : "; ") + b;
      throw Error(ErrorCode::kInvalidScenario, msg);
    }
  }
};

struct EventTruth {
  double t_s = 0.0;
  double delta_p_mw = 0.0;
  std::string plant_id;
  double event_rocof_hz_per_s = 0.0;      // f0 * dP / (2H)
  double pre_event_rocof_hz_per_s = 0.0;  // model df/dt just before the step
};

struct SimTruth {
  double h_true_mw_s = 0.0;
  double f0_hz = 60.0;
  std::vector<EventTruth> events;
  std::vector<OscillationSpec> oscillations;
};

struct SimTrace {
  std::vector<SensorStream> streams;  // one per monitor, scenario order
  SimTruth truth;

  const SensorStream& stream(const std::string& monitor_id) const {
    for (const auto& s : streams) {
      if (s.monitor_id == monitor_id) return s;
    }
    throw Error(ErrorCode::kInvalidConfig, "no stream for monitor '" + monitor_id + "'");
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline SimTrace simulate(const SimScenario& sc) {
  sc.validate();
  const double rate = sc.sample_rate_hz;
  const auto steps = static_cast<std::size_t>(sc.internal_steps_per_sample);
  const double internal_rate = rate * static_cast<double>(steps);
  const double dt = 1.0 / internal_rate;
  auto n_out = static_cast<std::size_t>(std::ceil(sc.duration_s * rate - 1e-9));
  const double gain = sc.f0_hz / (2.0 * sc.h_true_mw_s);

  SimTrace trace;
  trace.truth.h_true_mw_s = sc.h_true_mw_s;
  trace.truth.f0_hz = sc.f0_hz;
  trace.truth.oscillations = sc.oscillations;
  for (const auto& e : sc.events) {
    trace.truth.events.push_back({e.t_s, e.delta_p_mw, e.plant_id, gain * e.delta_p_mw, 0.0});
  }
  std::vector<bool> event_seen(sc.events.size(), false);

  // System trajectory at the reporting instants.
  std::vector<double> df_out(n_out, 0.0);
  std::mt19937_64 load_rng(splitmix64(sc.noise.seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const bool noisy = sc.noise.std_mw > 0.0;
  const double ou_a = std::exp(-dt / sc.noise.correlation_time_s);
  const double ou_b = sc.noise.std_mw * std::sqrt(1.0 - ou_a * ou_a);
  double load_noise = noisy ? sc.noise.std_mw * gauss(load_rng) : 0.0;
  double df = 0.0;
  double p_gov = 0.0;
  const std::size_t n_internal = n_out * steps;
  for (std::size_t k = 0; k < n_internal; ++k) {
    if (k % steps == 0) df_out[k / steps] = df;
    const double t = static_cast<double>(k) / internal_rate;
    double p_net = load_noise;
    if (t >= sc.ramp_start_s - kTimeEpsilon) p_net += sc.pre_ramp_mw;
    double p_events = 0.0;
    for (std::size_t e = 0; e < sc.events.size(); ++e) {
      if (t >= sc.events[e].t_s - kTimeEpsilon) {
        p_events += sc.events[e].delta_p_mw;
        if (!event_seen[e]) {
          event_seen[e] = true;
          // Slope the system had just before this step took effect.
          const double without = p_net + p_events - sc.events[e].delta_p_mw;
          trace.truth.events[e].pre_event_rocof_hz_per_s =
              gain * (without - sc.damping_mw_per_hz * df - p_gov);
        }
      }
    }
    p_net += p_events;
    const double ddf = gain * (p_net - sc.damping_mw_per_hz * df - p_gov);
    if (sc.governor.enabled) {
      p_gov += dt / sc.governor.time_constant_s * (sc.governor.droop_mw_per_hz * df - p_gov);
    }
    df += dt * ddf;
    if (noisy) load_noise = ou_a * load_noise + ou_b * gauss(load_rng);
  }

  auto osc_at = [&](double t, bool voltage) {
    double sum = 0.0;
    for (const auto& o : sc.oscillations) {
      if (t < o.start_s || t >= o.start_s + o.duration_s) continue;
      const double envelope = (t - o.start_s) / o.duration_s;
      const double amp = voltage ? o.v_amp_pu : o.amp_hz;
      sum += envelope * amp * std::sin(2.0 * std::numbers::pi * o.freq_hz * (t - o.start_s));
    }
    return sum;
  };

  trace.streams.reserve(sc.monitors.size());
  for (std::size_t m = 0; m < sc.monitors.size(); ++m) {
    const auto& mon = sc.monitors[m];
    std::mt19937_64 meas_rng(splitmix64(sc.noise.seed ^ (0xA5A5A5A5ULL + m)));
    std::normal_distribution<double> meas_gauss(0.0, 1.0);
    // Index of the first reporting sample at or after each local event.
    std::vector<std::optional<std::size_t>> spike_index(sc.events.size());
    for (std::size_t e = 0; e < sc.events.size(); ++e) {
      if (mon.near_plant && *mon.near_plant == sc.events[e].plant_id) {
        auto j = static_cast<std::size_t>(std::ceil(sc.events[e].t_s * rate - 1e-9));
        if (j < n_out) spike_index[e] = j;
      }
    }
    SensorStream stream;
    stream.monitor_id = mon.monitor_id;
    stream.samples.reserve(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
      const double t = static_cast<double>(j) / rate;
      double f = sc.f0_hz + df_out[j] + osc_at(t, false);
      double v = mon.v_nominal_pu + osc_at(t, true);
      for (std::size_t e = 0; e < sc.events.size(); ++e) {
        if (!spike_index[e]) continue;
        const double sign = sc.events[e].delta_p_mw >= 0.0 ? 1.0 : -1.0;
        if (j == *spike_index[e]) f += sign * mon.spike_amp_hz;
        if (j >= *spike_index[e]) {
          v += sign * mon.v_step_pu * std::exp(-(t - sc.events[e].t_s) / sc.voltage_recovery_s);
        }
      }
      // Draw noise for every sample, gapped or not, so a gap does not shift
      // the noise sequence of the samples that remain.
      const double fn = mon.f_noise_hz > 0.0 ? mon.f_noise_hz * meas_gauss(meas_rng) : 0.0;
      const double vn = mon.v_noise_pu > 0.0 ? mon.v_noise_pu * meas_gauss(meas_rng) : 0.0;
      if (mon.gap && t >= mon.gap->start_s - kTimeEpsilon && t < mon.gap->start_s + mon.gap->length_s - kTimeEpsilon) {
        continue;
      }
      TimedSample s{t, f + fn, std::nullopt};
      if (mon.has_voltage) s.v = v + vn;
      stream.samples.push_back(s);
    }
    trace.streams.push_back(std::move(stream));
  }
  return trace;
}

// Closed-form initial RoCoF for a restricted scenario (no damping, governor,
// noise or oscillation; exactly one event): the event slope plus the slope of
// the pre-event imbalance if it is active at the event instant.
inline double analytic_rocof(const SimScenario& sc) {
  std::vector<std::string> why;
  if (sc.damping_mw_per_hz != 0.0) why.push_back("damping_mw_per_hz != 0");
  if (sc.governor.enabled) why.push_back("governor enabled");
  if (sc.noise.std_mw != 0.0) why.push_back("noise.std_mw != 0");
  if (!sc.oscillations.empty()) why.push_back("oscillations present");
  if (sc.events.size() != 1) why.push_back("exactly one event required");
  if (!why.empty()) {
    std::string msg;
    for (const auto& w : why) msg += (msg.empty() ? "" : "; ") + w;
    throw Error(ErrorCode::kRestrictionViolated, msg);
  }
  if (!(sc.h_true_mw_s > 0.0)) throw Error(ErrorCode::kInvalidScenario, "h_true_mw_s: must be > 0");
  const double gain = sc.f0_hz / (2.0 * sc.h_true_mw_s);
  const auto& ev = sc.events.front();
  const double ramp = ev.t_s >= sc.ramp_start_s - kTimeEpsilon ? sc.pre_ramp_mw : 0.0;
  return gain * ev.delta_p_mw + gain * ramp;
}

struct CampaignSpec {
  std::vector<int> directions{-1, +1};   // sign applied to |pre_ramp_mw|
  std::size_t count_per_direction = 66;
  std::optional<std::uint64_t> master_seed;  // defaults to the base noise seed
  double ramp_scale_min = 1.0;
  double ramp_scale_max = 1.0;
};

struct CampaignCase {
  std::size_t index = 0;
  int direction = 0;
  std::uint64_t seed = 0;
  double ramp_scale = 1.0;
  SimScenario scenario;
  SimTrace trace;
};

// Deterministic expansion of the base scenario: case k (counting across all
// directions in order) uses noise seed master + k, and its ramp magnitude is
// |pre_ramp_mw| scaled by a factor drawn from that seed.
inline std::vector<CampaignCase> run_campaign(const SimScenario& base, const CampaignSpec& spec) {
  if (spec.count_per_direction < 1) throw Error(ErrorCode::kInvalidConfig, "campaign count must be >= 1");
  if (spec.directions.empty()) throw Error(ErrorCode::kInvalidConfig, "campaign needs at least one direction");
  if (!(spec.ramp_scale_min <= spec.ramp_scale_max)) throw Error(ErrorCode::kInvalidConfig, "ramp_scale_min > ramp_scale_max");
  base.validate();
  const std::uint64_t master = spec.master_seed.value_or(base.noise.seed);
  std::vector<CampaignCase> cases(spec.directions.size() * spec.count_per_direction);
  for (std::size_t d = 0; d < spec.directions.size(); ++d) {
    for (std::size_t i = 0; i < spec.count_per_direction; ++i) {
      const std::size_t k = d * spec.count_per_direction + i;
      auto& c = cases[k];
      c.index = k;
      c.direction = spec.directions[d] >= 0 ? 1 : -1;
      c.seed = master + k;
      c.ramp_scale = spec.ramp_scale_min;
      if (spec.ramp_scale_max > spec.ramp_scale_min) {
        std::mt19937_64 rng(splitmix64(c.seed ^ 0x5DEECE66DULL));
        c.ramp_scale = std::uniform_real_distribution<double>(spec.ramp_scale_min, spec.ramp_scale_max)(rng);
      }
      c.scenario = base;
      c.scenario.noise.seed = c.seed;
      c.scenario.pre_ramp_mw = c.direction * std::abs(base.pre_ramp_mw) * c.ramp_scale;
    }
  }
  parallel_for(cases.size(), [&](std::size_t k) { cases[k].trace = simulate(cases[k].scenario); });
  return cases;
}

}  // namespace inertiamon
