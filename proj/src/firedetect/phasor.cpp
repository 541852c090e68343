#include "firedetect/phasor.hpp"

#include "firedetect/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace firedetect::phasor {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMinXOverR = 0.13;
constexpr double kMaxXOverR = 4.26;
constexpr double kMaxLengthKm = 20.0;
} // namespace

double normalize_angle(double radians) noexcept {
    if (radians > -kPi && radians <= kPi) {
        return radians;
    }
    double a = std::remainder(radians, 2.0 * kPi); // [-pi, pi]
    if (a <= -kPi) {
        a += 2.0 * kPi;
    }
    return a;
}

Phasor Phasor::from_complex(Complex z) noexcept {
    const double mag = std::abs(z);
    return Phasor{mag, mag > 0.0 ? normalize_angle(std::arg(z)) : 0.0};
}

Phasor Phasor::polar(double magnitude, double angle) noexcept {
    if (magnitude < 0.0) {
        return Phasor{-magnitude, normalize_angle(angle + kPi)};
    }
    return Phasor{magnitude, normalize_angle(angle)};
}

void LineSegment::validate() const {
    std::ostringstream err;
    if (!(r_ref > 0.0)) {
        err << "segment.r_ref must be > 0 (got " << r_ref << ")";
    } else if (!(length_km > 0.0 && length_km <= kMaxLengthKm)) {
        err << "segment.length_km must lie in (0, 20] (got " << length_km << ")";
    } else if (const double ratio = x / r_ref; !(ratio >= kMinXOverR * (1 - 1e-12) && ratio <= kMaxXOverR * (1 + 1e-12))) {
        err << "segment x/r_ref must lie in [0.13, 4.26] (got " << ratio << ")";
    } else if (!(b_shunt >= 0.0)) {
        err << "segment.b_shunt must be >= 0";
    } else {
        return;
    }
    throw ValidationError(err.str());
}

double line_resistance(const LineSegment &seg, double t_c) {
    if (!(t_c >= kMinConductorTemp && t_c <= kMaxConductorTemp)) {
        std::ostringstream err;
        err << "conductor temperature " << t_c << " degC outside [-40, 300]";
        throw DomainError(err.str());
    }
    return seg.r_ref * (1.0 + seg.alpha * (t_c - seg.t_ref));
}

double true_tan_delta(const LineSegment &seg, double t_c) {
    return seg.x / line_resistance(seg, t_c);
}

SteadyStateComplex solve_steady_state_complex(const LineSegment &seg, const OperatingPoint &op, double t_c) {
    const double r = line_resistance(seg, t_c);
    const double x = seg.x;
    const double vs = op.source_voltage.magnitude;
    // Total capacitive susceptance hanging on the load bus: the receiving
    // shunt half plus the switchable bank.
    const double b_load = 0.5 * seg.b_shunt + op.shunt_compensation;
    const double p = op.load_p;
    const double q = op.load_q;

    // With u = |v_r|^2 and v_r on the real axis, the series branch carries
    // S_rr = p + j(q - b_load u) and KVL gives
    //   |u (1 - x b_load) + a + j(r b_load u + b)|^2 = vs^2 u
    // where a = r p + x q, b = x p - r q.
    const double a = r * p + x * q;
    const double b = x * p - r * q;
    const double c1 = 1.0 - x * b_load;
    const double c2 = r * b_load;
    const double qa = c1 * c1 + c2 * c2;
    const double qb = 2.0 * (a * c1 + b * c2) - vs * vs;
    const double qc = a * a + b * b;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (!(disc >= 0.0) || !(qa > 0.0)) {
        std::ostringstream err;
        err << "load (" << p << " W, " << q << " var) exceeds the transfer capability of the segment";
        throw InfeasibleError(err.str());
    }
    const double u = (-qb + std::sqrt(disc)) / (2.0 * qa);
    if (!(u > 0.0)) {
        throw InfeasibleError("no positive receiving-end voltage root");
    }

    const Complex z{r, x};
    const double vr_mag = std::sqrt(u);
    const Complex vr{vr_mag, 0.0};
    const Complex s_rr{p, q - b_load * u};
    const Complex i_ser = std::conj(s_rr) / vr_mag;
    const Complex vs_raw = vr + z * i_ser;

    // Rotate the solution so the sending end sits at the source angle.
    const Complex rot = std::polar(1.0, op.source_voltage.angle) * std::conj(vs_raw) / std::sqrt(std::norm(vs_raw));
    const Complex v_s = vs_raw * rot;
    const Complex v_r = vr * rot;
    const Complex i_series = i_ser * rot;
    const Complex half_b{0.0, 0.5 * seg.b_shunt};
    return SteadyStateComplex{v_s, v_r, i_series + half_b * v_s, i_series - half_b * v_r, i_series};
}

SteadyState solve_steady_state(const LineSegment &seg, const OperatingPoint &op, double t_c) {
    const SteadyStateComplex c = solve_steady_state_complex(seg, op, t_c);
    return SteadyState{
        Phasor::from_complex(c.v_s),    Phasor::from_complex(c.v_r),      Phasor::from_complex(c.i_s),
        Phasor::from_complex(c.i_r),    Phasor::from_complex(c.i_series),
    };
}

ReceivingPower receiving_power(const Phasor &v_r, const Phasor &i_r) noexcept {
    const double phi = v_r.angle - i_r.angle;
    const double s = v_r.magnitude * i_r.magnitude;
    return ReceivingPower{s * std::cos(phi), s * std::sin(phi)};
}

} // namespace firedetect::phasor
