#include "doctest.h"
#include "gen.hpp"

#include "firedetect/detector.hpp"
#include "firedetect/errors.hpp"

#include <cmath>
#include <functional>

using namespace firedetect;
using namespace firedetect::detector;
using phasor::Complex;

namespace {

SlopeValues slopes(double d6, double d4, double d3) {
    SlopeValues s;
    s.value[6] = d6;
    s.value[4] = d4;
    s.value[3] = d3;
    s.valid[6] = s.valid[4] = s.valid[3] = true;
    return s;
}

// Feeds f(t) sampled at the detector rate; returns the detector.
Detector feed(const DetectorConfig &cfg, int n, const std::function<std::optional<double>(double)> &f) {
    Detector d(cfg);
    for (int k = 0; k < n; ++k) {
        const double t = k / cfg.sample_rate;
        d.push(t, f(t));
    }
    return d;
}

} // namespace

TEST_CASE("window and lag sample counts") {
    DetectorConfig cfg;
    CHECK(cfg.window_samples() == 84);
    CHECK(cfg.lag_samples(1) == 83);
    CHECK(cfg.lag_samples(3) == 250);
    CHECK(cfg.lag_samples(6) == 500);
    CHECK(cfg.warmup_samples() == 584);
    CHECK(cfg.latency_budget() <= 0.5);
    cfg.k_set = {3, 4};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.k_set = {3, 4, 6, 13};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = DetectorConfig{};
    cfg.reporting_latency = 0.3;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("tan delta from solved phasors") {
    for (double ratio : {4.0, 0.13}) {
        phasor::LineSegment seg;
        seg.r_ref = 0.5;
        seg.x = ratio * 0.5;
        phasor::OperatingPoint op;
        op.source_voltage = phasor::Phasor::polar(79674.0, 0.1);
        op.load_p = 5e7;
        op.load_q = 2e7;
        const auto st = phasor::solve_steady_state(seg, op, 20.0);
        const auto td = tan_delta_sample(st.v_s, st.v_r, st.i_r);
        REQUIRE(td.has_value());
        CHECK(*td == doctest::Approx(ratio).epsilon(1e-9));
    }
}

TEST_CASE("pure reactance hits the invalid path") {
    const Complex i{0.0, -1.0};
    const Complex v_r{1.0, 0.0};
    const Complex v_s = v_r + Complex{0.0, 0.5} * i;
    CHECK_FALSE(tan_delta_sample(v_s, v_r, i).has_value());
    CHECK_FALSE(tan_delta_sample(v_s, v_r, Complex{0.0, 0.0}).has_value());
}

TEST_CASE("property: tan delta matches the division oracle and is scale invariant") {
    Rng rng(31);
    for (int n = 0; n < 10000; ++n) {
        const Complex v_r = std::polar(gen::uniform(rng, 0.5, 2.0), gen::uniform(rng, -3.0, 3.0));
        const Complex i = std::polar(gen::uniform(rng, 0.1, 2.0), gen::uniform(rng, -3.0, 3.0));
        const Complex z{gen::uniform(rng, 0.01, 1.0), gen::uniform(rng, 0.01, 1.0)};
        const Complex v_s = v_r + z * i;
        const auto td = tan_delta_sample(v_s, v_r, i);
        REQUIRE(td.has_value());
        const Complex oracle = (v_s - v_r) / i;
        REQUIRE(std::abs(*td - oracle.imag() / oracle.real()) <= 1e-9 * std::abs(*td));
        const double c = std::exp(gen::uniform(rng, -10.0, 10.0));
        const auto scaled = tan_delta_sample(c * v_s, c * v_r, c * i);
        REQUIRE(scaled.has_value());
        REQUIRE(std::abs(*scaled - *td) <= 1e-9 * std::abs(*td));
    }
}

TEST_CASE("moving average") {
    DetectorConfig cfg;
    const int w = cfg.window_samples();

    SUBCASE("constant series") {
        Detector d = feed(cfg, 300, [](double) { return 2.5; });
        CHECK(d.state().ma_series.back(0).defined);
        CHECK(d.state().ma_series.back(0).value == doctest::Approx(2.5).epsilon(1e-15));
    }
    SUBCASE("undefined until the window fills") {
        Detector d = feed(cfg, w - 1, [](double) { return 1.0; });
        CHECK_FALSE(d.state().ma_series.back(0).defined);
        d.push(w / cfg.sample_rate, 1.0);
        CHECK(d.state().ma_series.back(0).defined);
    }
    SUBCASE("ramp lags by half a window") {
        const double a = 3.0;
        Detector d = feed(cfg, 400, [a](double t) { return 1.0 + a * t; });
        const double t = 399 / cfg.sample_rate;
        const double half = 0.5 * (w - 1) / cfg.sample_rate;
        CHECK(d.state().ma_series.back(0).value == doctest::Approx(1.0 + a * (t - half)).epsilon(1e-12));
    }
    SUBCASE("invalid sample is excluded from the mean") {
        Detector d(cfg);
        for (int k = 0; k < w; ++k) {
            d.push(k / cfg.sample_rate, k == 40 ? std::optional<double>{} : std::optional<double>(k));
        }
        double sum = 0.0;
        for (int k = 0; k < w; ++k) {
            sum += k == 40 ? 0.0 : k;
        }
        CHECK(d.state().ma_series.back(0).value == doctest::Approx(sum / (w - 1)).epsilon(1e-14));
        CHECK(d.state().invalid_samples == 1);
        // the trace carries the held value
        CHECK(d.state().tan_delta_series.back(w - 1 - 40).value == 39.0);
        CHECK_FALSE(d.state().tan_delta_series.back(w - 1 - 40).valid);
    }
}

TEST_CASE("slope ratios") {
    DetectorConfig cfg;
    const int n = cfg.warmup_samples() + 50;

    SUBCASE("constant series gives exactly one") {
        Detector d = feed(cfg, n, [](double) { return 1.7; });
        for (int k : {3, 4, 6}) {
            CHECK(*slope_ratio(d.state(), cfg, k) == 1.0);
        }
    }
    SUBCASE("falling series gives ratios above one") {
        Detector d = feed(cfg, n, [](double t) { return 2.0 - t; });
        for (int k = 2; k <= 6; ++k) {
            CHECK(*slope_ratio(d.state(), cfg, k) > 1.0);
        }
        CHECK(d.decision().tripped);
    }
    SUBCASE("rising series gives ratios below one") {
        Detector d = feed(cfg, n, [](double t) { return 2.0 + t; });
        for (int k = 2; k <= 6; ++k) {
            CHECK(*slope_ratio(d.state(), cfg, k) < 1.0);
        }
        CHECK_FALSE(d.decision().tripped);
    }
    SUBCASE("undefined during warm-up") {
        Detector d = feed(cfg, cfg.warmup_samples() - 2, [](double t) { return 2.0 - t; });
        CHECK_FALSE(slope_ratio(d.state(), cfg, 6).has_value());
        CHECK_FALSE(d.decision().tripped);
    }
    SUBCASE("k-window lag mode agrees in sign") {
        cfg.lag_mode = LagMode::k_window;
        Detector d = feed(cfg, cfg.warmup_samples() + 10, [](double t) { return 2.0 - t; });
        CHECK(*slope_ratio(d.state(), cfg, 6) > *slope_ratio(d.state(), cfg, 3));
        CHECK(*slope_ratio(d.state(), cfg, 3) > 1.0);
    }
}

TEST_CASE("control rules") {
    CHECK(control1_condition(slopes(1.002, 0.999, 1.001)));
    CHECK(control2_condition(slopes(1.002, 0.999, 1.001)));
    CHECK_FALSE(control1_condition(slopes(0.999, 1.5, 1.5)));
    CHECK_FALSE(control2_condition(slopes(0.999, 1.5, 1.5)));
    CHECK(control2_condition(slopes(1.001, 0.999, 0.999)));
    CHECK_FALSE(control1_condition(slopes(1.001, 0.999, 0.999)));
    CHECK_FALSE(control1_condition(slopes(1.0, 1.0, 1.0)));
    SlopeValues missing = slopes(1.1, 1.1, 1.1);
    missing.valid[4] = false;
    CHECK_FALSE(control1_condition(missing));
}

TEST_CASE("first trip latches") {
    DetectorConfig cfg;
    const int n = cfg.warmup_samples() + 100;
    Detector d(cfg);
    double first = -1.0;
    for (int k = 0; k < n + 500; ++k) {
        const double t = k / cfg.sample_rate;
        // falls, then rises again
        d.push(t, k < n ? 2.0 - t : 2.0 - n / cfg.sample_rate + (t - n / cfg.sample_rate));
        if (first < 0.0 && d.decision().tripped) {
            first = d.decision().time;
        }
    }
    CHECK(first > 0.0);
    CHECK(d.decision().time == first);
    CHECK(d.slopes_at_trip(Control::control1).at(6) > 1.0);
}

TEST_CASE("compensation switch restart") {
    DetectorConfig cfg;
    const int n = cfg.warmup_samples() + 20;

    SUBCASE("step down without a fire does not trip after restart") {
        Detector d(cfg);
        for (int k = 0; k < 3 * n; ++k) {
            const double t = k / cfg.sample_rate;
            if (k == n) {
                d.switch_signal(t);
            }
            d.push(t, k < n ? 2.0 : 1.5);
        }
        CHECK_FALSE(d.decision().tripped);
        CHECK(d.state().restarts == 1);
    }
    SUBCASE("the same step without the signal trips") {
        Detector d = feed(cfg, 3 * n, [&](double t) { return t < n / cfg.sample_rate ? 2.0 : 1.5; });
        CHECK(d.decision().tripped);
    }
    SUBCASE("observed trigger restarts on the jump") {
        cfg.restart_trigger = RestartTrigger::observed;
        Detector d = feed(cfg, 3 * n, [&](double t) { return t < n / cfg.sample_rate ? 2.0 : 1.5; });
        CHECK_FALSE(d.decision().tripped);
        CHECK(d.state().restarts == 1);
    }
    SUBCASE("no switch leaves the state untouched") {
        Detector a = feed(cfg, n, [](double t) { return 2.0 - 0.1 * t; });
        Detector b = feed(cfg, n, [](double t) { return 2.0 - 0.1 * t; });
        CHECK(a.state().restarts == 0);
        CHECK(a.state().ma_series.back(0).value == b.state().ma_series.back(0).value);
    }
}
