#pragma once

#include "firedetect/detector.hpp"
#include "firedetect/measurement.hpp"
#include "firedetect/phasor.hpp"
#include "firedetect/thermal.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace firedetect::sim {

using phasor::Phasor;

struct LoadStep {
    double time = 0.0; // s
    double load_p = 0.0;
    double load_q = 0.0;
};

enum class CompensationKind { series, shunt };

// series: capacitive reactance (ohm) inserted in the monitored segment,
// 0 removes it. shunt: capacitor-bank susceptance (S) at the load bus.
struct CompensationSwitch {
    double time = 0.0;
    CompensationKind kind = CompensationKind::series;
    double value = 0.0;
};

struct RunSpec {
    phasor::LineSegment segment;
    phasor::OperatingPoint operating;
    std::vector<LoadStep> load_steps;
    std::vector<CompensationSwitch> switches;
    thermal::ConductorThermalParams thermal;
    thermal::Weather weather;          // wind and ambient without the fire
    std::optional<double> initial_t_c; // default: equilibrium at t = 0 load
    // When the fire ignites before the window, initial_t_c is the temperature
    // at ignition and the conductor is heated up to t = 0 at the t = 0 load.
    bool preheat = true;
    double preheat_step = 0.05; // s
    thermal::FireSource fire;
    thermal::FireCalibration calibration = thermal::default_calibration();
    measurement::MeasurementModel measurement;
    measurement::TimingFault timing_fault;
    detector::DetectorConfig detector;
    double duration = 0.5;       // s
    double sample_rate = 5000.0; // Hz, also used by the PMUs and the detector
    std::uint64_t seed = 0;

    void validate() const;
    std::int64_t sample_count() const;
};

struct SampleRecord {
    double t = 0.0;
    // true quantities
    Phasor v_s, v_r, i_s, i_r, i_series;
    double p_r = 0.0, q_r = 0.0;
    double t_c = 0.0, t_a = 0.0, resistance = 0.0, true_tan_delta = 0.0;
    // what the detector saw
    Phasor meas_v_s, meas_i_s, meas_v_r, meas_i_r;
    double tan_delta = 0.0;
    bool tan_delta_valid = false;
    double ma = 0.0;
    bool ma_defined = false;
    detector::SlopeValues slopes;
    bool control1 = false;
    bool control2 = false;
    bool switched = false;
};

struct TripEvent {
    detector::Control control = detector::Control::control1;
    double time = 0.0;          // detection
    double reported_time = 0.0; // detection + reporting + communication latency
    std::map<int, double> slope_values;
};

struct RunSummary {
    bool discarded = false;
    std::string discard_reason;
    bool fire_present = false;
    double delta_ta_end = 0.0; // ambient rise at the last sample
    double t_c_initial = 0.0; // at ignition when preheated, else at t = 0
    double t_c_start = 0.0;   // at t = 0
    double t_c_end = 0.0;
    double delta_tc = 0.0;    // t_c_end - t_c_initial
    double apparent_power_r = 0.0; // |P_R + jQ_R| at t = 0, VA per phase
    double current_start = 0.0;    // |I| series branch at t = 0
    std::optional<double> control1_time;
    std::optional<double> control2_time;
    detector::TripDecision decision; // configured control
    std::optional<double> reported_time;
    detector::SlopeValues final_slopes;
    std::int64_t samples = 0;
    std::int64_t invalid_samples = 0;
    std::int64_t restarts = 0;
};

struct RunTrace {
    std::vector<SampleRecord> records;
    std::vector<TripEvent> trips;
    RunSummary summary;
};

struct RunOptions {
    bool keep_records = true;
};

// Equilibrium conductor temperature for the operating point, iterating the
// temperature-dependent solve and the heat balance to a fixed point.
double steady_state_temperature(const phasor::LineSegment &seg, const phasor::OperatingPoint &op,
                                const thermal::ConductorThermalParams &params, const thermal::Weather &weather);

// Infeasible solves end the run early with summary.discarded set.
RunTrace run(const RunSpec &spec, const RunOptions &options = {});

} // namespace firedetect::sim
