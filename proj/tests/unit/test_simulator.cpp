#include "doctest.h"

#include "firedetect/config.hpp"
#include "firedetect/errors.hpp"
#include "firedetect/simulator.hpp"

#include <cmath>

using namespace firedetect;

namespace {

config::RunConfig quiet_fire() {
    config::RunConfig c;
    c.load_current = 1600.0;
    c.wind_speed = 0.5;
    c.fire_active = true;
    c.fire_distance = 5.0;
    c.ignition_time = -20.0;
    c.measurement = measurement::MeasurementModel::ideal();
    return c;
}

config::RunConfig quiet_no_fire() {
    config::RunConfig c = quiet_fire();
    c.fire_active = false;
    return c;
}

} // namespace

TEST_CASE("record count and timestamps") {
    const auto trace = sim::run(quiet_no_fire().to_run_spec());
    REQUIRE(trace.records.size() == 2500);
    for (std::size_t k = 1; k < trace.records.size(); ++k) {
        REQUIRE(trace.records[k].t > trace.records[k - 1].t);
    }
    CHECK(trace.summary.samples == 2500);
}

TEST_CASE("no fire and no noise gives a flat trace and no trip") {
    const auto trace = sim::run(quiet_no_fire().to_run_spec());
    const double first = trace.records.front().tan_delta;
    for (const auto &r : trace.records) {
        REQUIRE(std::abs(r.tan_delta - first) <= 1e-6 * first);
    }
    CHECK_FALSE(trace.summary.decision.tripped);
    CHECK(trace.trips.empty());
}

TEST_CASE("zero-noise tan delta equals x over R(t_c) at every sample") {
    const sim::RunSpec spec = quiet_fire().to_run_spec();
    const auto trace = sim::run(spec);
    for (const auto &r : trace.records) {
        REQUIRE(r.tan_delta_valid);
        const double truth = spec.segment.x / phasor::line_resistance(spec.segment, r.t_c);
        REQUIRE(std::abs(r.tan_delta - truth) <= 1e-9 * truth);
        REQUIRE(r.true_tan_delta == doctest::Approx(truth).epsilon(1e-12));
    }
}

TEST_CASE("fire near a heavily loaded line trips control 1 with a falling average") {
    const auto trace = sim::run(quiet_fire().to_run_spec());
    REQUIRE(trace.summary.decision.tripped);
    CHECK(trace.summary.control1_time.has_value());
    CHECK(trace.summary.decision.time < 0.5);
    CHECK(trace.records.back().ma < trace.records[100].ma);
    CHECK(trace.summary.t_c_end > trace.summary.t_c_start);
    REQUIRE_FALSE(trace.trips.empty());
    CHECK(trace.trips.front().reported_time ==
          doctest::Approx(trace.trips.front().time + 0.2 + 0.035).epsilon(1e-12));
}

TEST_CASE("latency budget holds under the default detector") {
    const auto trace = sim::run(quiet_fire().to_run_spec());
    const detector::DetectorConfig cfg;
    REQUIRE(trace.summary.reported_time.has_value());
    CHECK(cfg.latency_budget() <= 0.5);
    CHECK(*trace.summary.reported_time - trace.summary.decision.time <= 0.235 + 1e-12);
}

TEST_CASE("sample-rate refinement") {
    config::RunConfig c = quiet_fire();
    const auto base = sim::run(c.to_run_spec());
    c.sample_rate = 10000.0;
    const auto fine = sim::run(c.to_run_spec());
    CHECK(std::abs(fine.summary.t_c_end - base.summary.t_c_end) < 0.01);
    REQUIRE(base.summary.decision.tripped);
    REQUIRE(fine.summary.decision.tripped);
    CHECK(std::abs(fine.summary.decision.time - base.summary.decision.time) < 1.0 / 60.0);
}

TEST_CASE("preheating from ignition warms the conductor before the window") {
    config::RunConfig c = quiet_fire();
    const auto pre = sim::run(c.to_run_spec());
    c.preheat = false;
    const auto cold = sim::run(c.to_run_spec());
    CHECK(pre.summary.t_c_start > cold.summary.t_c_start + 0.1);
    CHECK(pre.summary.delta_tc == doctest::Approx(pre.summary.t_c_end - pre.summary.t_c_initial));
    CHECK(cold.summary.t_c_initial == cold.summary.t_c_start);
}

TEST_CASE("frozen sending PMU keeps the falling slope") {
    config::RunConfig c = quiet_fire();
    const auto base = sim::run(c.to_run_spec());
    c.timing_fault = {measurement::TimingFaultKind::frozen, measurement::Terminal::sending, 0.25, 0.1};
    const auto frozen = sim::run(c.to_run_spec());
    const auto &a = base.records.back();
    const auto &b = frozen.records.back();
    CHECK(a.slopes.get(6).value() > 1.0);
    CHECK(b.slopes.get(6).value() > 1.0);
    CHECK(frozen.summary.decision.tripped);
}

TEST_CASE("switching without fire does not trip after the restart") {
    config::RunConfig c = quiet_no_fire();
    c.switches.push_back({0.2, sim::CompensationKind::series, 0.5});
    const auto trace = sim::run(c.to_run_spec());
    CHECK(trace.summary.restarts == 1);
    CHECK_FALSE(trace.summary.decision.tripped);
}

TEST_CASE("runs are deterministic per seed") {
    config::RunConfig c = quiet_fire();
    c.measurement = measurement::MeasurementModel{};
    const auto a = sim::run(c.to_run_spec());
    const auto b = sim::run(c.to_run_spec());
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        REQUIRE(a.records[k].tan_delta == b.records[k].tan_delta);
    }
    c.seed = 99;
    const auto d = sim::run(c.to_run_spec());
    CHECK(d.records[10].tan_delta != a.records[10].tan_delta);
}

TEST_CASE("infeasible load discards the run") {
    config::RunConfig c = quiet_no_fire();
    c.load_current = 1600.0;
    c.load_steps.push_back({0.1, 1e6});
    const auto trace = sim::run(c.to_run_spec());
    CHECK(trace.summary.discarded);
    CHECK_FALSE(trace.summary.discard_reason.empty());
}

TEST_CASE("invalid specs are rejected") {
    config::RunConfig c = quiet_fire();
    c.fire_distance = 80.0;
    CHECK_THROWS_AS(sim::run(c.to_run_spec()), ValidationError);
    c = quiet_fire();
    c.duration = 0.05;
    CHECK_THROWS_AS(sim::run(c.to_run_spec()), ValidationError);
}
