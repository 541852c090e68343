#pragma once

#include "firedetect/phasor.hpp"

#include <map>
#include <string>
#include <vector>

namespace firedetect::thermal {

// Correlation constants for the heat balance. Field names follow the terms
// of the convection and radiation correlations; defaults are the SI values
// of the bare-conductor rating standard.
struct ThermalConstants {
    double elevation_m = 0.0;
    double wind_angle_factor = 1.0; // K_angle, wind perpendicular to the conductor
    // forced convection: K (c0 + c1 Re^n) k_f dT
    double forced_c0 = 1.01;
    double forced_c1 = 1.35;
    double forced_exponent = 0.52;
    // natural convection: c rho^0.5 D^0.75 dT^1.25
    double natural_coeff = 3.645;
    double natural_diameter_exponent = 0.75;
    double natural_dt_exponent = 1.25;
    // radiation: c D eps [((Ts+273)/100)^4 - ((Ta+273)/100)^4]
    double radiation_coeff = 17.8;
    // air viscosity: mu = a (T + 273)^1.5 / (T + b)
    double viscosity_a = 1.458e-6;
    double viscosity_b = 383.4;
    // air density: (d0 + d1 H + d2 H^2) / (1 + d3 T)
    double density_d0 = 1.293;
    double density_d1 = -1.525e-4;
    double density_d2 = 6.379e-9;
    double density_d3 = 0.00367;
    // air conductivity: k0 + k1 T + k2 T^2
    double conductivity_k0 = 2.424e-2;
    double conductivity_k1 = 7.477e-5;
    double conductivity_k2 = -4.407e-9;
};

struct ConductorThermalParams {
    double m_cp = 0.0;        // J/(m degC)
    double diameter = 0.0;    // m
    double emissivity = 0.8;  // [0.2, 0.95]
    double solar_gain = 0.0;  // W/m, zero for the worst case
    ThermalConstants constants;

    void validate() const;
};

// Catalogue entry: thermal parameters plus the electrical data needed to
// build a LineSegment and the static rating conditions.
struct Conductor {
    std::string name;
    double diameter = 0.0;
    double m_cp = 0.0;
    double emissivity = 0.8;
    double r20_per_m = 0.0; // ohm/m at 20 degC
    double alpha = 0.004;
};

struct RatingConditions {
    double max_conductor_temp = 75.0;
    double ambient_temp = 40.0;
    double wind_speed = 0.61;
};

struct ConductorCatalogue {
    ThermalConstants constants;
    RatingConditions rating;
    std::map<std::string, Conductor> conductors;

    const Conductor &at(const std::string &name) const;
    ConductorThermalParams params_for(const std::string &name) const;
};

// Built-in catalogue; the same content ships as data/conductors.yaml.
const ConductorCatalogue &default_catalogue();

struct ThermalState {
    double t_c = 20.0; // average strand-layer temperature
    double t_s = 20.0; // surface temperature, equal to t_c in the lumped model
    double t_a = 20.0; // ambient at the conductor
};

struct Weather {
    double v_w = 0.0; // m/s
    double t_a = 20.0;
};

// Heat balance terms in W/m; convection and radiation are signed (negative
// when the air is hotter than the surface).
double convection_loss(const ConductorThermalParams &p, double v_w, double t_s, double t_a);
double radiation_loss(const ConductorThermalParams &p, double t_s, double t_a);

// dT_c/dt in degC/s for the current state.
double temperature_rate(const ThermalState &state, const ConductorThermalParams &params,
                        const phasor::LineSegment &seg, double i_rms, const Weather &weather);

// One explicit Euler step of the heat balance. dt in (0, 0.1] s, v_w in [0, 6.5] m/s.
ThermalState step_conductor_temp(const ThermalState &state, const ConductorThermalParams &params,
                                 const phasor::LineSegment &seg, double i_rms, const Weather &weather,
                                 double dt);

// Temperature where gains equal losses for a constant current and weather.
double equilibrium_temperature(const ConductorThermalParams &params, const phasor::LineSegment &seg,
                               double i_rms, const Weather &weather);

// Steady-state ampacity at the rating conditions (q_s = 0).
double static_rating_current(const ConductorThermalParams &params, double r20_per_m, double alpha,
                             const RatingConditions &cond);

// ---- fire seat ambient model ----

struct CalibrationPoint {
    double d = 0.0; // m
    double f = 0.0; // degC / sqrt(s)
};

struct FireCalibration {
    std::vector<CalibrationPoint> distance_grid; // sorted by d, f strictly decreasing
    double exponent = 0.5;

    double min_distance() const;
    double max_distance() const;
    // log-linear interpolation of f(d)
    double factor(double d) const;
    // inverse of factor(): distance whose factor equals f, clamped to the grid
    double distance_for_factor(double f) const;
};

struct TableSample {
    double d = 0.0;
    double t_f = 0.0;
    double delta_ta = 0.0;
};

// The published table of ambient temperature rise near a fire seat.
const std::vector<TableSample> &reference_table();

// Calibration from the t_f = 10 s column of the reference table.
const FireCalibration &default_calibration();

FireCalibration calibrate_from_table(const std::vector<TableSample> &samples, double tolerance = 0.01);

// f(d) sqrt(t_f); DomainError when d lies outside the calibration grid.
double fire_delta_ta(const FireCalibration &cal, double d, double t_f);

struct FireSource {
    double distance = 5.0;      // m
    double ignition_time = 0.0; // s, may precede the simulation window
    bool active = false;

    void validate() const;
    // Ambient rise at simulation time t.
    double delta_ta(const FireCalibration &cal, double t) const;
};

} // namespace firedetect::thermal
