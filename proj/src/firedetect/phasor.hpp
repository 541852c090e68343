#pragma once

#include <complex>

namespace firedetect::phasor {

using Complex = std::complex<double>;

// Wraps an angle into (-pi, pi].
double normalize_angle(double radians) noexcept;

struct Phasor {
    double magnitude = 0.0;
    double angle = 0.0; // radians, (-pi, pi]

    static Phasor from_complex(Complex z) noexcept;
    static Phasor polar(double magnitude, double angle) noexcept;
    Complex to_complex() const noexcept { return std::polar(magnitude, angle); }
};

// One conductor (phase) of the monitored S-R part in the pi-model.
// r_ref and x are totals for the segment, b_shunt is the total shunt
// susceptance split half per terminal.
struct LineSegment {
    double r_ref = 0.0;   // ohm at t_ref
    double x = 0.0;       // ohm
    double b_shunt = 0.0; // S
    double length_km = 1.0;
    double alpha = 0.004; // 1/degC
    double t_ref = 20.0;  // degC

    // Throws ValidationError when the tested ranges are violated
    // (r_ref > 0, length in (0, 20] km, x/r_ref in [0.13, 4.26]).
    void validate() const;
};

struct OperatingPoint {
    Phasor source_voltage;         // ideal source behind S, volts per phase
    double load_p = 0.0;           // W
    double load_q = 0.0;           // var, positive inductive
    double shunt_compensation = 0.0; // S, capacitor bank at the load bus
};

struct SteadyState {
    Phasor v_s;
    Phasor v_r;
    Phasor i_s;      // terminal current injected at S (series + shunt half)
    Phasor i_r;      // terminal current leaving the line at R (series - shunt half)
    Phasor i_series; // current through the series impedance
};

struct ReceivingPower {
    double p_r = 0.0;
    double q_r = 0.0;
};

inline constexpr double kMinConductorTemp = -40.0;
inline constexpr double kMaxConductorTemp = 300.0;

// R(T_c) = r_ref [1 + alpha (T_c - t_ref)]; DomainError outside [-40, 300] degC.
double line_resistance(const LineSegment &seg, double t_c);

// x / R(T_c)
double true_tan_delta(const LineSegment &seg, double t_c);

struct SteadyStateComplex {
    Complex v_s, v_r, i_s, i_r, i_series;
};

// Closed-form two-bus solve for a constant-PQ load behind the pi-model.
// Takes the higher |v_r| root; throws InfeasibleError when no real positive root exists.
SteadyState solve_steady_state(const LineSegment &seg, const OperatingPoint &op, double t_c);
SteadyStateComplex solve_steady_state_complex(const LineSegment &seg, const OperatingPoint &op, double t_c);

ReceivingPower receiving_power(const Phasor &v_r, const Phasor &i_r) noexcept;

} // namespace firedetect::phasor
