#include "doctest.h"
#include "gen.hpp"

#include "firedetect/errors.hpp"
#include "firedetect/phasor.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

using namespace firedetect;
using namespace firedetect::phasor;

namespace {

LineSegment seg_with(double r_ref, double x, double b = 0.0) {
    LineSegment s;
    s.r_ref = r_ref;
    s.x = x;
    s.b_shunt = b;
    s.length_km = 10.0;
    return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("resistance follows the linear temperature law") {
    CHECK(line_resistance(seg_with(0.1, 0.2), 20.0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(line_resistance(seg_with(0.1, 0.2), 120.0) == doctest::Approx(0.14).epsilon(1e-14));
    CHECK(line_resistance(seg_with(0.05, 0.1), 10.0) == doctest::Approx(0.048).epsilon(1e-14));
    CHECK_THROWS_AS(line_resistance(seg_with(0.1, 0.2), 400.0), DomainError);
    CHECK_THROWS_AS(line_resistance(seg_with(0.1, 0.2), -50.0), DomainError);
}

TEST_CASE("true tan delta") {
    CHECK(true_tan_delta(seg_with(1.0, 4.0), 20.0) == doctest::Approx(4.0));
    CHECK(true_tan_delta(seg_with(1.0, 4.0), 120.0) == doctest::Approx(4.0 / 1.4).epsilon(1e-14));
    CHECK(true_tan_delta(seg_with(1.0, 0.13), 20.0) == doctest::Approx(0.13).epsilon(1e-15));
}

TEST_CASE("segment validation names the field") {
    CHECK_THROWS_AS(seg_with(0.0, 1.0).validate(), ValidationError);
    CHECK_THROWS_AS(seg_with(1.0, 5.0).validate(), ValidationError);
    CHECK_THROWS_AS(seg_with(1.0, 0.1).validate(), ValidationError);
    LineSegment long_line = seg_with(1.0, 2.0);
    long_line.length_km = 25.0;
    CHECK_THROWS_AS(long_line.validate(), ValidationError);
    CHECK_NOTHROW(seg_with(1.0, 0.13).validate());
    CHECK_NOTHROW(seg_with(1.0, 4.26).validate());
}

TEST_CASE("receiving power") {
    auto p = receiving_power(Phasor::polar(1.0, 0.0), Phasor::polar(1.0, 0.0));
    CHECK(p.p_r == doctest::Approx(1.0));
    CHECK(p.q_r == doctest::Approx(0.0));
    p = receiving_power(Phasor::polar(1.0, 0.0), Phasor::polar(1.0, -std::numbers::pi / 2));
    CHECK(p.p_r == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.q_r == doctest::Approx(1.0));

    Rng rng(3);
    for (int n = 0; n < 1000; ++n) {
        const Complex v{gen::uniform(rng, -5, 5), gen::uniform(rng, -5, 5)};
        const Complex i{gen::uniform(rng, -5, 5), gen::uniform(rng, -5, 5)};
        const Complex s = v * std::conj(i);
        const auto r = receiving_power(Phasor::from_complex(v), Phasor::from_complex(i));
        REQUIRE(std::abs(r.p_r - s.real()) <= 1e-12 * (1 + std::abs(s)));
        REQUIRE(std::abs(r.q_r - s.imag()) <= 1e-12 * (1 + std::abs(s)));
    }
}

TEST_CASE("angle normalization keeps (-pi, pi]") {
    CHECK(normalize_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(normalize_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(normalize_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
}

TEST_CASE("lossless line transfers |vs||vr| sin(theta) / x") {
    LineSegment s = seg_with(0.0, 4.0);
    OperatingPoint op;
    op.source_voltage = Phasor::polar(1.0, 0.0);
    op.load_p = 0.05;
    op.load_q = 0.01;
    const auto st = solve_steady_state_complex(s, op, 20.0);
    const double theta = std::arg(st.v_s) - std::arg(st.v_r);
    const double p = (st.v_r * std::conj(st.i_r)).real();
    CHECK(rel(p, std::abs(st.v_s) * std::abs(st.v_r) * std::sin(theta) / 4.0) < 1e-9);
    CHECK(rel(p, 0.05) < 1e-9);
}

TEST_CASE("open circuit leaves the receiving voltage at the source") {
    OperatingPoint op;
    op.source_voltage = Phasor::polar(79674.0, 0.3);
    const auto st = solve_steady_state(seg_with(0.5, 1.0), op, 40.0);
    CHECK(st.v_r.magnitude == doctest::Approx(79674.0).epsilon(1e-12));
    CHECK(st.v_r.angle == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(st.i_r.magnitude == doctest::Approx(0.0));
    CHECK(st.i_s.magnitude == doctest::Approx(0.0));
}

TEST_CASE("per-unit example satisfies the division oracle") {
    // 1+j4 on a base ten times the system base, i.e. 0.1+j0.4 pu
    OperatingPoint op;
    op.source_voltage = Phasor::polar(1.0, 0.0);
    op.load_p = 0.5;
    op.load_q = 0.2;
    const auto st = solve_steady_state_complex(seg_with(0.1, 0.4), op, 20.0);
    const Complex z = (st.v_s - st.v_r) / st.i_r;
    CHECK(rel(z.real(), 0.1) < 1e-9);
    CHECK(rel(z.imag(), 0.4) < 1e-9);
    const Complex s = st.v_r * std::conj(st.i_r);
    CHECK(rel(s.real(), 0.5) < 1e-9);
    CHECK(rel(s.imag(), 0.2) < 1e-9);
}

TEST_CASE("infeasible loads are reported") {
    OperatingPoint op;
    op.source_voltage = Phasor::polar(1.0, 0.0);
    op.load_p = 10.0;
    CHECK_THROWS_AS(solve_steady_state(seg_with(1.0, 4.0), op, 20.0), InfeasibleError);
}

TEST_CASE("property: series branch reproduces x / R(t_c)") {
    Rng rng(11);
    for (int n = 0; n < 2000; ++n) {
        const LineSegment s = gen::segment(rng, true);
        const OperatingPoint op = gen::operating(rng);
        const double t_c = gen::uniform(rng, 0.0, 250.0);
        const auto st = solve_steady_state_complex(s, op, t_c);
        const Complex z = (st.v_s - st.v_r) / st.i_series;
        REQUIRE(rel(z.imag() / z.real(), true_tan_delta(s, t_c)) < 1e-9);
        if (s.b_shunt == 0.0) {
            const Complex zt = (st.v_s - st.v_r) / st.i_r;
            REQUIRE(rel(zt.imag() / zt.real(), true_tan_delta(s, t_c)) < 1e-9);
        }
    }
}

TEST_CASE("property: solve is bit-deterministic") {
    Rng rng(12);
    for (int n = 0; n < 200; ++n) {
        const LineSegment s = gen::segment(rng, true);
        const OperatingPoint op = gen::operating(rng);
        const auto a = solve_steady_state_complex(s, op, 60.0);
        const auto b = solve_steady_state_complex(s, op, 60.0);
        REQUIRE(std::memcmp(&a, &b, sizeof a) == 0);
    }
}

TEST_CASE("property: tan delta strictly falls as t_c rises") {
    Rng rng(13);
    for (int n = 0; n < 1000; ++n) {
        const LineSegment s = gen::segment(rng);
        const double t1 = gen::uniform(rng, -40.0, 299.0);
        const double t2 = gen::uniform(rng, t1 + 1e-6, 300.0);
        REQUIRE(true_tan_delta(s, t2) < true_tan_delta(s, t1));
    }
}

TEST_CASE("property: power balance across the pi model") {
    Rng rng(14);
    for (int n = 0; n < 2000; ++n) {
        const LineSegment s = gen::segment(rng, true);
        const OperatingPoint op = gen::operating(rng);
        const double t_c = gen::uniform(rng, 0.0, 200.0);
        const auto st = solve_steady_state_complex(s, op, t_c);
        const Complex s_s = st.v_s * std::conj(st.i_s);
        const Complex s_r = st.v_r * std::conj(st.i_r);
        const double i2 = std::norm(st.i_series);
        const double r = line_resistance(s, t_c);
        const double p_loss = i2 * r;
        const double q_loss = i2 * s.x - 0.5 * s.b_shunt * (std::norm(st.v_s) + std::norm(st.v_r));
        const double scale = std::abs(s_s);
        REQUIRE(std::abs((s_s.real() - s_r.real()) - p_loss) <= 1e-8 * scale);
        REQUIRE(std::abs((s_s.imag() - s_r.imag()) - q_loss) <= 1e-8 * scale);
        // the load bus sees the requested power plus the bank
        REQUIRE(std::abs(s_r.real() - op.load_p) <= 1e-8 * scale);
    }
}
