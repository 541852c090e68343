#include "doctest.h"

#include "firedetect/config.hpp"
#include "firedetect/errors.hpp"
#include "firedetect/io.hpp"

#include <sstream>

using namespace firedetect;

TEST_CASE("run config round trips through its own emitter") {
    config::RunConfig c;
    c.seed = 42;
    c.load_current = 1234.5;
    c.fire_active = true;
    c.ignition_time = -3.0;
    c.initial_t_c = 55.0;
    c.load_steps.push_back({0.1, 900.0});
    c.switches.push_back({0.2, sim::CompensationKind::shunt, 1e-5});
    c.timing_fault = {measurement::TimingFaultKind::delay, measurement::Terminal::receiving, 0.1, 0.05};
    c.detector.control = detector::Control::control2;
    const std::string text = config::emit_run_config(c);
    const config::RunConfig back = config::parse_run_config(text);
    CHECK(config::emit_run_config(back) == text);
    CHECK(back.load_current == 1234.5);
    CHECK(back.initial_t_c == 55.0);
    CHECK(back.load_steps.size() == 1);
    CHECK(back.timing_fault.kind == measurement::TimingFaultKind::delay);
}

TEST_CASE("json input is accepted") {
    const auto c = config::parse_run_config(R"({"schema": "firedetect.run v1", "seed": 3, "line": {"length_km": 5}})");
    CHECK(c.seed == 3);
    CHECK(c.length_km == 5.0);
}

TEST_CASE("unknown keys and bad values name the field") {
    try {
        config::parse_run_config("line: {foo: 1}");
        FAIL("expected ValidationError");
    } catch (const ValidationError &e) {
        CHECK(std::string(e.what()).find("line.foo") != std::string::npos);
    }
    try {
        config::parse_run_config("detector: {control: control3}");
        FAIL("expected ValidationError");
    } catch (const ValidationError &e) {
        CHECK(std::string(e.what()).find("control1") != std::string::npos);
    }
    CHECK_THROWS_AS(config::parse_run_config("seed: abc"), ValidationError);
    CHECK_THROWS_AS(config::parse_run_config("schema: firedetect.sweep v1"), ValidationError);
    CHECK_THROWS_AS(config::parse_sweep_config("grid: {wind: {lo: 0, hi: 1, intervals: 2}}"), ValidationError);
}

TEST_CASE("sweep, rules and catalogue configs round trip") {
    mc::SweepConfig s;
    s.subsample = mc::Subsample{mc::SubsampleKind::lhs, 77};
    s.delta_tc_since_ignition = false;
    const std::string st = config::emit_sweep_config(s);
    CHECK(config::emit_sweep_config(config::parse_sweep_config(st)) == st);
    const std::string rt = config::emit_rules_config(config::RulesConfig{});
    CHECK(config::emit_rules_config(config::parse_rules_config(rt)) == rt);
    const std::string ct = config::emit_catalogue(thermal::default_catalogue());
    CHECK(config::emit_catalogue(config::parse_catalogue(ct)) == ct);
}

TEST_CASE("shipped configs load") {
    for (const char *name : {"run_fire.yaml", "run_fire_noisy.yaml", "run_no_fire.yaml", "run_frozen.yaml",
                             "run_switch.yaml"}) {
        CHECK_NOTHROW(config::load_run_config(std::string(FD_CONFIG_DIR) + "/" + name).to_run_spec().validate());
    }
    CHECK_NOTHROW(config::load_sweep_config(std::string(FD_CONFIG_DIR) + "/sweep_small.yaml").validate());
    CHECK_NOTHROW(config::load_rules_config(std::string(FD_CONFIG_DIR) + "/rules.yaml"));
    CHECK_NOTHROW(config::load_catalogue(std::string(FD_DATA_DIR) + "/conductors.yaml"));
}

TEST_CASE("fire table reader") {
    const auto rows = io::read_fire_table_file(std::string(FD_DATA_DIR) + "/table1.csv");
    CHECK(rows.size() == 12);
    std::ostringstream out;
    io::write_fire_table(out, rows);
    std::istringstream in(out.str());
    const auto back = io::read_fire_table(in);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].delta_ta == rows[i].delta_ta);
    }

    std::istringstream empty("");
    CHECK_THROWS_AS(io::read_fire_table(empty), ValidationError);
    std::istringstream corrupt("d_m,t_f_s,delta_ta_c\n5,10,30.99\n5,abc,1\n");
    try {
        io::read_fire_table(corrupt);
        FAIL("expected CalibrationError");
    } catch (const CalibrationError &e) {
        REQUIRE_FALSE(e.offending_rows().empty());
        CHECK(e.offending_rows()[0].find("line 3") != std::string::npos);
    }
}

TEST_CASE("table reproduction from the 10 s column") {
    const auto rows = io::read_fire_table_file(std::string(FD_DATA_DIR) + "/table1.csv");
    thermal::FireCalibration cal;
    const auto rep = io::reproduce_table(rows, 10.0, &cal);
    CHECK(rep.rows.size() == 12);
    CHECK(rep.max_held_out < 0.01);
    const auto again = io::calibration_from_json(io::calibration_to_json(cal));
    CHECK(again.factor(5.0) == cal.factor(5.0));
}

TEST_CASE("run summary round trip") {
    config::RunConfig c;
    c.fire_active = true;
    c.load_current = 1600.0;
    const auto spec = c.to_run_spec();
    const auto trace = sim::run(spec);
    const auto back = io::summary_from_json(io::summary_to_json(trace, spec));
    CHECK(back.t_c_end == trace.summary.t_c_end);
    CHECK(back.control1_time == trace.summary.control1_time);
    CHECK(back.delta_tc == trace.summary.delta_tc);
    std::ostringstream csv;
    io::write_trace_csv(csv, trace);
    std::istringstream in(csv.str());
    const auto table = io::read_csv_table(in);
    CHECK(table.rows.size() == trace.records.size());
    CHECK(table.schema == "firedetect.trace v1");
    CHECK(io::trace_to_svg(trace).find("<svg") != std::string::npos);
}

TEST_CASE("sweep summary round trip") {
    mc::SweepConfig s;
    s.subsample = mc::Subsample{mc::SubsampleKind::stratified, 4};
    s.tests_per_cell = 2;
    const auto result = mc::run_sweep(s, 1);
    const std::string json = io::sweep_summary_to_json(result, s);
    CHECK(io::sweep_summary_to_json(io::sweep_summary_from_json(json), s) == json);
    CHECK(io::sweep_report(result, s).find("99.32") != std::string::npos);
}

TEST_CASE("shortest round-trip number formatting") {
    CHECK(io::format_double(0.85) == "0.85");
    CHECK(io::format_double(3e-5) == "3e-05");
    CHECK(io::format_double(2.0) == "2");
}
