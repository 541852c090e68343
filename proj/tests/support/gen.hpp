#pragma once
// Hand-rolled generators for the property tests.

#include "firedetect/phasor.hpp"
#include "firedetect/rng.hpp"
#include "firedetect/thermal.hpp"

#include <cmath>
#include <numbers>

namespace gen {

inline double uniform(firedetect::Rng &rng, double lo, double hi) { return lo + rng.uniform01() * (hi - lo); }

// A Bluebird-like segment with random length and X/R in the appendix range.
inline firedetect::phasor::LineSegment segment(firedetect::Rng &rng, bool with_shunt = false) {
    firedetect::phasor::LineSegment seg;
    seg.length_km = uniform(rng, 0.5, 20.0);
    seg.r_ref = 4.4e-5 * 1000.0 * seg.length_km;
    seg.x = uniform(rng, 0.13, 4.26) * seg.r_ref;
    seg.b_shunt = with_shunt ? uniform(rng, 0.0, 4e-6) * seg.length_km : 0.0;
    return seg;
}

// 138 kV feed with a lagging load drawing up to 1600 A.
inline firedetect::phasor::OperatingPoint operating(firedetect::Rng &rng) {
    firedetect::phasor::OperatingPoint op;
    const double v = 138e3 / std::sqrt(3.0);
    op.source_voltage = firedetect::phasor::Phasor::polar(v, uniform(rng, -std::numbers::pi, std::numbers::pi));
    const double i = uniform(rng, 10.0, 1600.0);
    const double pf = uniform(rng, 0.7, 1.0);
    op.load_p = v * i * pf;
    op.load_q = v * i * std::sqrt(1.0 - pf * pf);
    return op;
}

} // namespace gen
