#include "firedetect/thermal.hpp"

#include "firedetect/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace firedetect::thermal {

namespace {

constexpr double kKelvin = 273.0;

struct FilmProperties {
    double viscosity;    // kg/(m s)
    double density;      // kg/m^3
    double conductivity; // W/(m degC)
};

FilmProperties film_properties(const ThermalConstants &k, double t_film) {
    const double h = k.elevation_m;
    return FilmProperties{
        k.viscosity_a * (t_film + kKelvin) * std::sqrt(t_film + kKelvin) / (t_film + k.viscosity_b),
        (k.density_d0 + k.density_d1 * h + k.density_d2 * h * h) / (1.0 + k.density_d3 * t_film),
        k.conductivity_k0 + k.conductivity_k1 * t_film + k.conductivity_k2 * t_film * t_film,
    };
}

// pow() with fast paths for the quarter exponents of the correlations
double power(double x, double e) {
    if (e == 0.75) {
        const double r = std::sqrt(x);
        return r * std::sqrt(r);
    }
    if (e == 1.25) {
        return x * std::sqrt(std::sqrt(x));
    }
    return std::pow(x, e);
}

double fourth(double x) {
    const double sq = x * x;
    return sq * sq;
}

double resistance_per_meter(const phasor::LineSegment &seg, double t_c) {
    return phasor::line_resistance(seg, t_c) / (seg.length_km * 1000.0);
}

double net_heat(const ConductorThermalParams &params, const phasor::LineSegment &seg, double t_c,
                double i_rms, const Weather &weather) {
    return resistance_per_meter(seg, t_c) * i_rms * i_rms + params.solar_gain -
           convection_loss(params, weather.v_w, t_c, weather.t_a) - radiation_loss(params, t_c, weather.t_a);
}

} // namespace

void ConductorThermalParams::validate() const {
    if (!(m_cp > 0.0)) {
        throw ValidationError("thermal.m_cp must be > 0");
    }
    if (!(diameter > 0.0)) {
        throw ValidationError("thermal.diameter must be > 0");
    }
    if (!(emissivity >= 0.2 && emissivity <= 0.95)) {
        throw ValidationError("thermal.emissivity must lie in [0.2, 0.95]");
    }
}

const Conductor &ConductorCatalogue::at(const std::string &name) const {
    const auto it = conductors.find(name);
    if (it == conductors.end()) {
        throw ValidationError("unknown conductor '" + name + "'");
    }
    return it->second;
}

ConductorThermalParams ConductorCatalogue::params_for(const std::string &name) const {
    const Conductor &c = at(name);
    ConductorThermalParams p;
    p.m_cp = c.m_cp;
    p.diameter = c.diameter;
    p.emissivity = c.emissivity;
    p.constants = constants;
    return p;
}

const ConductorCatalogue &default_catalogue() {
    static const ConductorCatalogue catalogue = [] {
        ConductorCatalogue c;
        // Nominal ACSR data; heat capacity from aluminium (955 J/kg degC) and
        // steel (476 J/kg degC) masses per meter.
        c.conductors["drake"] = Conductor{"drake", 0.02814, 1310.0, 0.8, 7.17e-5, 0.004};
        c.conductors["lapwing"] = Conductor{"lapwing", 0.0382, 2348.0, 0.8, 3.56e-5, 0.004};
        c.conductors["bluebird"] = Conductor{"bluebird", 0.04476, 3280.0, 0.8, 2.64e-5, 0.004};
        return c;
    }();
    return catalogue;
}

double convection_loss(const ConductorThermalParams &p, double v_w, double t_s, double t_a) {
    const ThermalConstants &k = p.constants;
    const double dt = t_s - t_a;
    if (dt == 0.0) {
        return 0.0;
    }
    const FilmProperties air = film_properties(k, 0.5 * (t_s + t_a));
    const double reynolds = p.diameter * air.density * v_w / air.viscosity;
    const double abs_dt = std::abs(dt);
    const double forced =
        k.wind_angle_factor * (k.forced_c0 + k.forced_c1 * std::pow(reynolds, k.forced_exponent)) *
        air.conductivity * abs_dt;
    const double natural = k.natural_coeff * std::sqrt(air.density) *
                           power(p.diameter, k.natural_diameter_exponent) *
                           power(abs_dt, k.natural_dt_exponent);
    return std::copysign(std::max(forced, natural), dt);
}

double radiation_loss(const ConductorThermalParams &p, double t_s, double t_a) {
    return p.constants.radiation_coeff * p.diameter * p.emissivity *
           (fourth((t_s + kKelvin) / 100.0) - fourth((t_a + kKelvin) / 100.0));
}

double temperature_rate(const ThermalState &state, const ConductorThermalParams &params,
                        const phasor::LineSegment &seg, double i_rms, const Weather &weather) {
    return net_heat(params, seg, state.t_c, i_rms, weather) / params.m_cp;
}

ThermalState step_conductor_temp(const ThermalState &state, const ConductorThermalParams &params,
                                 const phasor::LineSegment &seg, double i_rms, const Weather &weather,
                                 double dt) {
    if (!(dt > 0.0 && dt <= 0.1)) {
        throw DomainError("thermal step dt must lie in (0, 0.1] s");
    }
    if (!(weather.v_w >= 0.0 && weather.v_w <= 6.5)) {
        throw DomainError("wind speed must lie in [0, 6.5] m/s");
    }
    const double t_c = state.t_c + dt * temperature_rate(state, params, seg, i_rms, weather);
    return ThermalState{t_c, t_c, weather.t_a};
}

double equilibrium_temperature(const ConductorThermalParams &params, const phasor::LineSegment &seg,
                               double i_rms, const Weather &weather) {
    // net heat is decreasing in T_c; bracket between the coldest admissible
    // temperature and the top of the resistance law's range
    double lo = std::max(phasor::kMinConductorTemp, weather.t_a - 100.0);
    double hi = phasor::kMaxConductorTemp;
    if (net_heat(params, seg, lo, i_rms, weather) < 0.0) {
        throw DomainError("no thermal equilibrium above the lower temperature bound");
    }
    if (net_heat(params, seg, hi, i_rms, weather) > 0.0) {
        throw DomainError("no thermal equilibrium below 300 degC for this current");
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (net_heat(params, seg, mid, i_rms, weather) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double g_lo = std::abs(net_heat(params, seg, lo, i_rms, weather));
    const double g_hi = std::abs(net_heat(params, seg, hi, i_rms, weather));
    return g_lo <= g_hi ? lo : hi;
}

double static_rating_current(const ConductorThermalParams &params, double r20_per_m, double alpha,
                             const RatingConditions &cond) {
    const double losses = convection_loss(params, cond.wind_speed, cond.max_conductor_temp, cond.ambient_temp) +
                          radiation_loss(params, cond.max_conductor_temp, cond.ambient_temp) - params.solar_gain;
    const double r = r20_per_m * (1.0 + alpha * (cond.max_conductor_temp - 20.0));
    if (!(losses > 0.0) || !(r > 0.0)) {
        throw DomainError("static rating undefined for these rating conditions");
    }
    return std::sqrt(losses / r);
}

// ---- fire seat ambient model ----

double FireCalibration::min_distance() const {
    if (distance_grid.empty()) {
        throw ValidationError("empty fire calibration");
    }
    return distance_grid.front().d;
}

double FireCalibration::max_distance() const {
    if (distance_grid.empty()) {
        throw ValidationError("empty fire calibration");
    }
    return distance_grid.back().d;
}

double FireCalibration::factor(double d) const {
    if (!(d >= min_distance() && d <= max_distance())) {
        std::ostringstream err;
        err << "distance " << d << " m outside the calibration grid [" << min_distance() << ", "
            << max_distance() << "]";
        throw DomainError(err.str());
    }
    const auto upper = std::lower_bound(distance_grid.begin(), distance_grid.end(), d,
                                        [](const CalibrationPoint &p, double v) { return p.d < v; });
    if (upper->d == d) {
        return upper->f;
    }
    const auto lower = upper - 1;
    const double w = (d - lower->d) / (upper->d - lower->d);
    return std::exp((1.0 - w) * std::log(lower->f) + w * std::log(upper->f));
}

double FireCalibration::distance_for_factor(double f) const {
    if (distance_grid.empty()) {
        throw ValidationError("empty fire calibration");
    }
    if (f >= distance_grid.front().f) {
        return distance_grid.front().d;
    }
    if (f <= distance_grid.back().f) {
        return distance_grid.back().d;
    }
    for (std::size_t i = 0; i + 1 < distance_grid.size(); ++i) {
        const auto &a = distance_grid[i];
        const auto &b = distance_grid[i + 1];
        if (f <= a.f && f >= b.f) {
            const double w = (std::log(f) - std::log(a.f)) / (std::log(b.f) - std::log(a.f));
            return a.d + w * (b.d - a.d);
        }
    }
    return distance_grid.back().d;
}

const std::vector<TableSample> &reference_table() {
    static const std::vector<TableSample> table = {
        {50.0, 10.0, 8.23e-5}, {50.0, 30.0, 1.42e-4}, {50.0, 60.0, 2.02e-4},
        {10.0, 10.0, 5.81},    {10.0, 30.0, 10.06},   {10.0, 60.0, 14.23},
        {5.0, 10.0, 30.99},    {5.0, 30.0, 53.69},    {5.0, 60.0, 75.93},
        {1.0, 10.0, 71.61},    {1.0, 30.0, 124.03},   {1.0, 60.0, 175.40},
    };
    return table;
}

const FireCalibration &default_calibration() {
    static const FireCalibration cal = [] {
        std::vector<TableSample> column;
        for (const TableSample &s : reference_table()) {
            if (s.t_f == 10.0) {
                column.push_back(s);
            }
        }
        return calibrate_from_table(column);
    }();
    return cal;
}

FireCalibration calibrate_from_table(const std::vector<TableSample> &samples, double tolerance) {
    if (samples.empty()) {
        throw ValidationError("calibration table is empty");
    }
    std::vector<std::string> bad;
    auto describe = [](const TableSample &s) {
        std::ostringstream os;
        os << "d=" << s.d << " t_f=" << s.t_f << " delta_ta=" << s.delta_ta;
        return os.str();
    };
    std::map<double, std::vector<const TableSample *>> by_distance;
    for (const TableSample &s : samples) {
        if (!(s.d > 0.0) || !(s.t_f > 0.0) || !(s.delta_ta > 0.0)) {
            bad.push_back(describe(s) + " (non-positive value)");
            continue;
        }
        by_distance[s.d].push_back(&s);
    }
    if (!bad.empty()) {
        throw CalibrationError("calibration table has invalid rows", bad);
    }

    FireCalibration cal;
    for (const auto &[d, rows] : by_distance) {
        double sum = 0.0;
        for (const TableSample *s : rows) {
            sum += s->delta_ta / std::sqrt(s->t_f);
        }
        const double f = sum / static_cast<double>(rows.size());
        for (const TableSample *s : rows) {
            const double dev = s->delta_ta / std::sqrt(s->t_f) / f - 1.0;
            if (std::abs(dev) > tolerance) {
                std::ostringstream os;
                os << describe(*s) << " deviates " << 100.0 * dev << "% from the sqrt(t_f) law";
                bad.push_back(os.str());
            }
        }
        cal.distance_grid.push_back(CalibrationPoint{d, f});
    }
    if (!bad.empty()) {
        throw CalibrationError("calibration rows inconsistent with sqrt(t_f) scaling", bad);
    }
    for (std::size_t i = 0; i + 1 < cal.distance_grid.size(); ++i) {
        if (!(cal.distance_grid[i + 1].f < cal.distance_grid[i].f)) {
            std::ostringstream os;
            os << "f(d) not strictly decreasing between d=" << cal.distance_grid[i].d
               << " and d=" << cal.distance_grid[i + 1].d;
            throw CalibrationError(os.str(), {});
        }
    }
    return cal;
}

double fire_delta_ta(const FireCalibration &cal, double d, double t_f) {
    if (!(t_f >= 0.0)) {
        throw DomainError("heating time must be >= 0");
    }
    const double f = cal.factor(d);
    if (t_f == 0.0) {
        return 0.0;
    }
    if (cal.exponent == 0.5) {
        return f * std::sqrt(t_f);
    }
    return f * std::pow(t_f, cal.exponent);
}

void FireSource::validate() const {
    if (!(distance > 0.0 && distance <= 50.0)) {
        throw ValidationError("fire.distance_m must lie in (0, 50]");
    }
}

double FireSource::delta_ta(const FireCalibration &cal, double t) const {
    if (!active || t <= ignition_time) {
        return 0.0;
    }
    return fire_delta_ta(cal, distance, t - ignition_time);
}

} // namespace firedetect::thermal
