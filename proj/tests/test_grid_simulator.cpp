#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "inertiamon/grid_simulator.hpp"
#include "inertiamon/io.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace inertiamon;
using Catch::Approx;

namespace {

std::string serialize(const SimTrace& trace) {
  std::ostringstream os;
  for (const auto& s : trace.streams) write_stream_csv(os, s);
  os << truth_to_json(trace.truth).dump();
  return os.str();
}

SimScenario two_monitor_trip() {
  auto sc = fixtures::restricted(1e5, 310.0);
  sc.monitors.push_back(MonitorSpec{.monitor_id = "far"});
  return sc;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("simulate: equilibrium without disturbances", "[grid_simulator]") {
  SimScenario sc;
  sc.monitors = {MonitorSpec{.monitor_id = "a", .near_plant = "Helms"}, MonitorSpec{.monitor_id = "b"}};
  sc.duration_s = 30.0;
  const auto trace = simulate(sc);
  REQUIRE(trace.streams.size() == 2);
  for (const auto& s : trace.streams) {
    CHECK(s.samples.size() == 300);
    for (const auto& x : s.samples) {
      CHECK(x.f == 60.0);
      CHECK(x.v == 1.0);
    }
  }
}

TEST_CASE("simulate: initial RoCoF matches the swing equation", "[grid_simulator][oracle]") {
  const auto sc = two_monitor_trip();
  const auto trace = simulate(sc);
  const double expected = oracle::swing_rocof(60.0, 310.0, 1e5);
  CHECK(expected == Approx(0.093).epsilon(1e-12));
  CHECK(analytic_rocof(sc) == Approx(expected).epsilon(1e-12));
  for (double w : {0.1, 0.2, 0.3}) {
    // far monitor, window starting at the step: no spike inside
    const auto r = rocof(trace.stream("far"), Window{20.0, w + 1e-6});
    INFO("window " << w);
    CHECK(std::abs(r.slope - expected) / expected < 0.005);
    // near monitor, post-event window excluding the spike sample
    if (w < 0.2) continue;  // one sample after the spike
    const auto n = rocof(trace.stream("near"), Window{20.0, w, WindowEdges::kOpenClosed});
    CHECK(std::abs(n.slope - expected) / expected < 0.005);
  }
}

TEST_CASE("simulate: load loss raises frequency monotonically", "[grid_simulator]") {
  const auto trace = simulate(two_monitor_trip());
  const auto& far = trace.stream("far");
  const auto window = select(far, Window{20.0, 0.5});
  REQUIRE(window.size() >= 4);
  for (std::size_t i = 1; i < window.size(); ++i) CHECK(window[i].f > window[i - 1].f);
}

TEST_CASE("simulate: artifacts stay local", "[grid_simulator]") {
  auto sc = two_monitor_trip();
  sc.monitors.front().v_step_pu = 0.01;
  const auto trace = simulate(sc);
  const auto& near = trace.stream("near").samples;
  const auto& far = trace.stream("far").samples;
  REQUIRE(near.size() == far.size());
  for (std::size_t j = 0; j < near.size(); ++j) {
    const double diff = near[j].f - far[j].f;
    if (j == 200) {
      CHECK(diff == Approx(0.06).margin(1e-9));
    } else {
      CHECK(diff == 0.0);
    }
    CHECK(far[j].v == 1.0);
    if (j < 200) CHECK(near[j].v == 1.0);
  }
  CHECK(*near[200].v == Approx(1.01).margin(1e-12));
  CHECK(voltage_step(trace.stream("near"), 20.0, 0.2, 0.5) == Approx(0.01).epsilon(0.01));
  CHECK(voltage_step(trace.stream("far"), 20.0, 0.2, 0.5) == 0.0);
}

TEST_CASE("simulate: negative step trips downward", "[grid_simulator]") {
  auto sc = two_monitor_trip();
  sc.events.front().delta_p_mw = -310.0;
  const auto trace = simulate(sc);
  CHECK(trace.stream("near").samples[200].f < trace.stream("far").samples[200].f);
  CHECK(rocof(trace.stream("far"), Window{20.0, 0.3}).slope == Approx(-0.093).epsilon(0.005));
  CHECK(analytic_rocof(sc) == Approx(-0.093).epsilon(1e-12));
}

TEST_CASE("simulate: determinism", "[grid_simulator]") {
  auto sc = fixtures::trigger_corpus();
  sc.duration_s = 3600.0;
  sc.events.resize(2);
  sc.oscillations.resize(1);
  CHECK(serialize(simulate(sc)) == serialize(simulate(sc)));
  auto other = sc;
  other.noise.seed += 1;
  CHECK(serialize(simulate(other)) != serialize(simulate(sc)));
}

TEST_CASE("simulate: replay determinism property", "[grid_simulator][property]") {
  const auto o = props::replay_determinism(1000, 41);
  INFO(o.first_failure);
  CHECK(o.cases == 1000);
  CHECK(o.failures == 0);
}

TEST_CASE("simulate: data gaps remove only the configured samples", "[grid_simulator]") {
  auto sc = fixtures::trigger_corpus();
  sc.duration_s = 120.0;
  sc.events = {{60.0, 310.0, "Helms"}};
  sc.oscillations.clear();
  auto gapped = sc;
  gapped.monitors[0].gap = DataGap{55.0, 15.0};
  const auto full = simulate(sc);
  const auto cut = simulate(gapped);
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& a = full.streams[m].samples;
    const auto& b = cut.streams[m].samples;
    if (m == 0) {
      std::vector<TimedSample> expect;
      for (const auto& x : a) {
        if (!(x.t >= 55.0 - 1e-9 && x.t < 70.0 - 1e-9)) expect.push_back(x);
      }
      CHECK(a.size() - b.size() == 150);
      CHECK(b == expect);
    } else {
      CHECK(a == b);
    }
  }
}

TEST_CASE("simulate: voltage channel can be omitted", "[grid_simulator]") {
  auto sc = two_monitor_trip();
  sc.monitors[1].has_voltage = false;
  const auto trace = simulate(sc);
  CHECK(trace.stream("near").has_voltage());
  CHECK_FALSE(trace.stream("far").has_voltage());
}

TEST_CASE("simulate: truth records event and pre-event slopes", "[grid_simulator]") {
  auto sc = two_monitor_trip();
  sc.pre_ramp_mw = 100.0;
  sc.ramp_start_s = 5.0;
  const auto trace = simulate(sc);
  REQUIRE(trace.truth.events.size() == 1);
  const auto& ev = trace.truth.events.front();
  CHECK(ev.event_rocof_hz_per_s == Approx(0.093).epsilon(1e-12));
  CHECK(ev.pre_event_rocof_hz_per_s == Approx(0.03).epsilon(1e-12));
  CHECK(analytic_rocof(sc) == Approx(0.123).epsilon(1e-12));
  CHECK(rocof(trace.stream("far"), Window{10.0, 5.0}).slope == Approx(0.03).epsilon(1e-9));
}

TEST_CASE("analytic_rocof", "[grid_simulator][oracle]") {
  auto sc = fixtures::restricted(1e5, 310.0);
  CHECK(analytic_rocof(sc) == Approx(0.093).epsilon(1e-12));
  auto doubled = sc;
  doubled.h_true_mw_s = 2e5;
  CHECK(analytic_rocof(doubled) == Approx(0.0465).epsilon(1e-12));
  auto ramp_only = sc;
  ramp_only.events.front().delta_p_mw = 0.0;
  ramp_only.pre_ramp_mw = 50.0;
  CHECK(analytic_rocof(ramp_only) == Approx(60.0 * 50.0 / 2e5).epsilon(1e-12));

  auto noisy = sc;
  noisy.noise.std_mw = 1.0;
  CHECK(code_of([&] { analytic_rocof(noisy); }) == ErrorCode::kRestrictionViolated);
  auto gov = sc;
  gov.governor.enabled = true;
  CHECK(code_of([&] { analytic_rocof(gov); }) == ErrorCode::kRestrictionViolated);
  auto damped = sc;
  damped.damping_mw_per_hz = 10.0;
  CHECK(code_of([&] { analytic_rocof(damped); }) == ErrorCode::kRestrictionViolated);
  auto two = sc;
  two.events.push_back({25.0, 100.0, "Helms"});
  CHECK(code_of([&] { analytic_rocof(two); }) == ErrorCode::kRestrictionViolated);
}

TEST_CASE("scenario validation reports every bad field", "[grid_simulator]") {
  SimScenario sc;
  sc.h_true_mw_s = -1.0;
  sc.sample_rate_hz = 0.0;
  sc.events = {{500.0, 10.0, "x"}};
  try {
    simulate(sc);
    FAIL("expected InvalidScenario");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidScenario);
    const std::string msg = e.what();
    CHECK(msg.find("h_true_mw_s") != std::string::npos);
    CHECK(msg.find("sample_rate_hz") != std::string::npos);
    CHECK(msg.find("events[0].t_s") != std::string::npos);
    CHECK(msg.find("monitors") != std::string::npos);
  }
}

TEST_CASE("run_campaign", "[grid_simulator][campaign]") {
  SECTION("single flat case equals simulate(base)") {
    auto base = fixtures::ramp_campaign_base();
    base.pre_ramp_mw = 0.0;
    CampaignSpec spec;
    spec.directions = {+1};
    spec.count_per_direction = 1;
    const auto cases = run_campaign(base, spec);
    REQUIRE(cases.size() == 1);
    CHECK(serialize(cases.front().trace) == serialize(simulate(base)));
  }
  SECTION("66 up + 66 down") {
    CampaignSpec spec;
    spec.ramp_scale_min = 0.4;
    spec.ramp_scale_max = 1.2;
    const auto cases = run_campaign(fixtures::ramp_campaign_base(), spec);
    REQUIRE(cases.size() == 132);
    std::size_t up = 0, down = 0;
    std::set<std::uint64_t> seeds;
    for (const auto& c : cases) {
      (c.direction > 0 ? up : down)++;
      seeds.insert(c.seed);
      CHECK(c.ramp_scale >= 0.4);
      CHECK(c.ramp_scale <= 1.2);
      CHECK(c.scenario.pre_ramp_mw * c.direction > 0.0);
      const double pre = c.trace.truth.events.front().pre_event_rocof_hz_per_s;
      CHECK(pre * c.direction > 0.0);
    }
    CHECK(up == 66);
    CHECK(down == 66);
    CHECK(seeds.size() == 132);
  }
  SECTION("same master seed reproduces the campaign") {
    CampaignSpec spec;
    spec.count_per_direction = 3;
    spec.master_seed = 99;
    const auto a = run_campaign(fixtures::ramp_campaign_base(), spec);
    const auto b = run_campaign(fixtures::ramp_campaign_base(), spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(serialize(a[i].trace) == serialize(b[i].trace));
  }
  SECTION("bad specs") {
    CampaignSpec spec;
    spec.count_per_direction = 0;
    CHECK(code_of([&] { run_campaign(fixtures::ramp_campaign_base(), spec); }) == ErrorCode::kInvalidConfig);
  }
}
