#pragma once

// Shared scenario builders for the test suites.

#include <string>

#include "inertiamon/grid_simulator.hpp"
#include "inertiamon/plant.hpp"

namespace fixtures {

using namespace inertiamon;

// One near monitor, no noise, no governor, no damping: the swing equation
// integrates exactly and the analytic RoCoF is the truth.
inline SimScenario restricted(double h_mw_s, double delta_p_mw, double event_t = 20.0) {
  SimScenario sc;
  sc.h_true_mw_s = h_mw_s;
  sc.events = {{event_t, delta_p_mw, "Helms"}};
  sc.monitors = {MonitorSpec{.monitor_id = "near", .near_plant = "Helms"}};
  sc.duration_s = event_t + 10.0;
  return sc;
}

// Eastern-Interconnection-flavoured campaign base: correlated load noise and a
// background imbalance that the campaign turns into up/down pre-event ramps.
inline SimScenario ramp_campaign_base() {
  SimScenario sc;
  sc.h_true_mw_s = 1.7e6;
  sc.noise = {50.0, 3.0, 7};
  sc.events = {{20.0, 477.0, "BathCounty"}};
  sc.pre_ramp_mw = 283.0;  // about 5 mHz/s of background slope
  sc.monitors = {MonitorSpec{.monitor_id = "M1", .near_plant = "BathCounty"}};
  sc.duration_s = 30.0;
  return sc;
}

// Same base with primary-frequency response, which bends the post-event
// trajectory and penalises long fit windows.
inline SimScenario governor_campaign_base() {
  auto sc = ramp_campaign_base();
  sc.governor = {true, 80000.0, 8.0};
  return sc;
}

// A day of ambient noise on three monitors: 50 Helms pump trips every 1700 s,
// 10 growing 0.5 Hz oscillations placed between trips, and a data gap on
// monitor A across the eighth trip. A and B sit near Helms, C is remote.
inline SimScenario trigger_corpus() {
  SimScenario sc;
  sc.h_true_mw_s = 1e6;
  sc.damping_mw_per_hz = 10000.0;
  sc.governor = {true, 20000.0, 8.0};
  sc.noise = {50.0, 3.0, 2024};
  sc.duration_s = 86400.0;
  for (int k = 0; k < 50; ++k) sc.events.push_back({600.0 + 1700.0 * k, 310.0, "Helms"});
  for (int k = 0; k < 10; ++k) {
    sc.oscillations.push_back({0.5, 0.04, 0.01, 600.0 + 1700.0 * (5 * k + 2) + 850.0, 20.0});
  }
  MonitorSpec a{.monitor_id = "A", .near_plant = "Helms"};
  a.v_noise_pu = 0.001;
  a.f_noise_hz = 0.0005;
  a.gap = DataGap{600.0 + 1700.0 * 7 - 5.0, 15.0};
  MonitorSpec b = a;
  b.monitor_id = "B";
  b.gap.reset();
  MonitorSpec c = b;
  c.monitor_id = "C";
  c.near_plant.reset();
  sc.monitors = {a, b, c};
  return sc;
}

inline PlantSignature helms() { return {"Helms", "WECC", 351.0, 310.0, 0.07}; }

}  // namespace fixtures
