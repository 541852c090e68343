#pragma once

#include "firedetect/dtree.hpp"
#include "firedetect/montecarlo.hpp"
#include "firedetect/simulator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace firedetect::config {

struct LoadStepConfig {
    double time = 0.0;
    double current = 0.0; // A at the run's power factor
};

// User-level description of one run; to_run_spec() derives ohms and watts.
struct RunConfig {
    std::uint64_t seed = 1;
    double duration = 0.5;
    double sample_rate = 5000.0;
    // line
    std::string conductor = "bluebird";
    std::string catalogue_file; // empty: built-in catalogue
    double length_km = 10.0;
    double x_over_r = 2.0;
    double b_shunt = 0.0;
    double alpha = 0.004;
    double t_ref = 20.0;
    // operating point
    double nominal_voltage_kv = 138.0; // line-to-line
    double load_current = 1000.0;      // A
    double power_factor = 0.85;
    double pf_correction = 0.0;
    std::vector<LoadStepConfig> load_steps;
    std::vector<sim::CompensationSwitch> switches;
    // thermal and weather
    std::optional<double> initial_t_c; // at ignition when preheating
    bool preheat = true;
    double wind_speed = 0.5;
    double ambient = 30.0;
    // fire
    bool fire_active = false;
    double fire_distance = 5.0;
    double ignition_time = 0.0;
    std::string calibration_table; // empty: built-in table
    measurement::MeasurementModel measurement;
    measurement::TimingFault timing_fault;
    detector::DetectorConfig detector;

    sim::RunSpec to_run_spec() const;
};

struct RulesConfig {
    std::string label = "label";
    // identifiers, direct fire descriptors and trip outputs stay out of the features
    std::vector<std::string> exclude{"cell",    "test",     "delta_ta", "fire_distance", "burn_time",
                                     "control1", "control2", "d3",       "d4",            "d6",
                                     "cond_a",   "cond_b",   "cond_c",   "dtc_gt_2_87"};
    dtree::TrainConfig train;
    double min_purity = 0.90;
};

// Relative file references inside a config resolve against base_dir;
// load_* passes the config file's directory.
RunConfig load_run_config(const std::string &path);
RunConfig parse_run_config(const std::string &text, const std::string &base_dir = {});
std::string emit_run_config(const RunConfig &cfg);

mc::SweepConfig load_sweep_config(const std::string &path);
mc::SweepConfig parse_sweep_config(const std::string &text, const std::string &base_dir = {});
std::string emit_sweep_config(const mc::SweepConfig &cfg);

thermal::ConductorCatalogue load_catalogue(const std::string &path);
thermal::ConductorCatalogue parse_catalogue(const std::string &text);
std::string emit_catalogue(const thermal::ConductorCatalogue &catalogue);

RulesConfig load_rules_config(const std::string &path);
RulesConfig parse_rules_config(const std::string &text);
std::string emit_rules_config(const RulesConfig &cfg);

// name <-> enum helpers shared with the report writers
std::string to_string(detector::Control c);
std::string to_string(detector::RestartTrigger t);
std::string to_string(detector::LagMode m);
std::string to_string(measurement::ErrorDistribution d);
std::string to_string(measurement::ErrorTemporal t);
std::string to_string(measurement::TimingFaultKind k);
std::string to_string(measurement::Terminal t);
std::string to_string(sim::CompensationKind k);

} // namespace firedetect::config
