#include "firedetect/config.hpp"

#include "firedetect/errors.hpp"
#include "firedetect/io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <filesystem>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <type_traits>
#include <sstream>

namespace firedetect::config {

std::string to_string(detector::Control c) { return c == detector::Control::control1 ? "control1" : "control2"; }

std::string to_string(detector::RestartTrigger t) {
    switch (t) {
    case detector::RestartTrigger::signal:
        return "signal";
    case detector::RestartTrigger::observed:
        return "observed";
    case detector::RestartTrigger::both:
        return "both";
    }
    return "signal";
}

std::string to_string(detector::LagMode m) { return m == detector::LagMode::fixed_window ? "fixed_window" : "k_window"; }

std::string to_string(measurement::ErrorDistribution d) {
    return d == measurement::ErrorDistribution::uniform ? "uniform" : "truncated_gaussian";
}

std::string to_string(measurement::ErrorTemporal t) {
    return t == measurement::ErrorTemporal::iid ? "iid" : "static_per_run";
}

std::string to_string(measurement::TimingFaultKind k) {
    switch (k) {
    case measurement::TimingFaultKind::none:
        return "none";
    case measurement::TimingFaultKind::frozen:
        return "frozen";
    case measurement::TimingFaultKind::delay:
        return "delay";
    }
    return "none";
}

std::string to_string(measurement::Terminal t) { return t == measurement::Terminal::sending ? "sending" : "receiving"; }

std::string to_string(sim::CompensationKind k) { return k == sim::CompensationKind::series ? "series" : "shunt"; }

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// shortest round-trip text for doubles, everything else unchanged
template <typename T> auto num(const T &x) {
    if constexpr (std::is_same_v<T, double>) {
        return io::format_double(x);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        std::vector<std::string> out;
        for (double v : x) {
            out.push_back(io::format_double(v));
        }
        return out;
    } else {
        return x;
    }
}

std::string join(const std::string &path, const std::string &key) { return path.empty() ? key : path + "." + key; }

void check_keys(const YAML::Node &n, const std::string &path, const std::set<std::string> &allowed) {
    if (!n || n.IsNull()) {
        return;
    }
    if (!n.IsMap()) {
        throw ValidationError((path.empty() ? std::string("config") : path) + ": expected a mapping");
    }
    for (const auto &kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            throw ValidationError("unknown key '" + join(path, key) + "'");
        }
    }
}

template <typename T> void read(const YAML::Node &n, const char *key, T &out, const std::string &path) {
    if (!n || n.IsNull()) {
        return;
    }
    const YAML::Node v = n[key];
    if (!v || v.IsNull()) {
        return;
    }
    try {
        out = v.as<T>();
    } catch (const YAML::Exception &) {
        throw ValidationError(join(path, key) + ": invalid value '" + YAML::Dump(v) + "'");
    }
}

template <typename E>
void read_enum(const YAML::Node &n, const char *key, E &out, const std::string &path,
               const std::vector<std::pair<std::string, E>> &options) {
    std::string s;
    read(n, key, s, path);
    if (s.empty()) {
        return;
    }
    for (const auto &[name, value] : options) {
        if (s == name) {
            out = value;
            return;
        }
    }
    std::string allowed;
    for (const auto &o : options) {
        allowed += (allowed.empty() ? "" : ", ") + o.first;
    }
    throw ValidationError(join(path, key) + ": '" + s + "' is not one of " + allowed);
}

YAML::Node parse_root(const std::string &text) {
    try {
        YAML::Node root = YAML::Load(text);
        if (!root || root.IsNull()) {
            return YAML::Node(YAML::NodeType::Map);
        }
        if (!root.IsMap()) {
            throw ValidationError("config: expected a mapping at the top level");
        }
        return root;
    } catch (const YAML::Exception &e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
}

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string resolve(const std::string &base_dir, const std::string &file) {
    if (file.empty() || base_dir.empty() || std::filesystem::path(file).is_absolute()) {
        return file;
    }
    return (std::filesystem::path(base_dir) / file).string();
}

std::string dir_of(const std::string &path) {
    const auto parent = std::filesystem::path(path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

void check_schema(const YAML::Node &root, const std::string &expected) {
    std::string schema;
    read(root, "schema", schema, "");
    if (!schema.empty() && schema != expected) {
        throw ValidationError("schema: expected '" + expected + "', got '" + schema + "'");
    }
}

// ---- shared sections ----

const std::set<std::string> kMeasurementKeys{"v_err",         "i_err_low",         "i_err_high",
                                             "tve",           "angle_err_deg",     "nominal_current_a",
                                             "distribution",  "temporal"};

void read_measurement(const YAML::Node &n, const std::string &path, measurement::MeasurementModel &m,
                      bool bounds_allowed) {
    if (!n) {
        return;
    }
    if (bounds_allowed) {
        check_keys(n, path, kMeasurementKeys);
    } else {
        check_keys(n, path, {"tve", "angle_err_deg", "nominal_current_a", "distribution", "temporal"});
    }
    read(n, "v_err", m.v_mag_err_max, path);
    read(n, "i_err_low", m.i_mag_err_max_low, path);
    read(n, "i_err_high", m.i_mag_err_max_high, path);
    read(n, "tve", m.tve_max, path);
    double deg = m.angle_err_max / kDeg;
    read(n, "angle_err_deg", deg, path);
    m.angle_err_max = deg * kDeg;
    read(n, "nominal_current_a", m.nominal_current, path);
    read_enum(n, "distribution", m.distribution, path,
              {{"uniform", measurement::ErrorDistribution::uniform},
               {"truncated_gaussian", measurement::ErrorDistribution::truncated_gaussian}});
    read_enum(n, "temporal", m.temporal, path,
              {{"iid", measurement::ErrorTemporal::iid}, {"static_per_run", measurement::ErrorTemporal::static_per_run}});
}

void emit_measurement(YAML::Emitter &e, const measurement::MeasurementModel &m, bool bounds) {
    e << YAML::BeginMap;
    if (bounds) {
        e << YAML::Key << "v_err" << YAML::Value << num(m.v_mag_err_max);
        e << YAML::Key << "i_err_low" << YAML::Value << num(m.i_mag_err_max_low);
        e << YAML::Key << "i_err_high" << YAML::Value << num(m.i_mag_err_max_high);
    }
    e << YAML::Key << "tve" << YAML::Value << num(m.tve_max);
    e << YAML::Key << "angle_err_deg" << YAML::Value << num(m.angle_err_max / kDeg);
    e << YAML::Key << "nominal_current_a" << YAML::Value << num(m.nominal_current);
    e << YAML::Key << "distribution" << YAML::Value << to_string(m.distribution);
    e << YAML::Key << "temporal" << YAML::Value << to_string(m.temporal);
    e << YAML::EndMap;
}

void read_detector(const YAML::Node &n, const std::string &path, detector::DetectorConfig &d) {
    if (!n) {
        return;
    }
    check_keys(n, path,
               {"frequency_hz", "ma_window_cycles", "k_set", "control", "step_change_threshold", "restart_trigger",
                "lag_mode", "denominator_epsilon", "ratio_epsilon", "reporting_latency_s", "communication_latency_s"});
    double f = 1.0 / d.cycle_period;
    read(n, "frequency_hz", f, path);
    if (!(f > 0.0)) {
        throw ValidationError(join(path, "frequency_hz") + " must be positive");
    }
    d.cycle_period = 1.0 / f;
    read(n, "ma_window_cycles", d.ma_window_cycles, path);
    read(n, "k_set", d.k_set, path);
    read_enum(n, "control", d.control, path,
              {{"control1", detector::Control::control1}, {"control2", detector::Control::control2}});
    read(n, "step_change_threshold", d.step_change_threshold, path);
    read_enum(n, "restart_trigger", d.restart_trigger, path,
              {{"signal", detector::RestartTrigger::signal},
               {"observed", detector::RestartTrigger::observed},
               {"both", detector::RestartTrigger::both}});
    read_enum(n, "lag_mode", d.lag_mode, path,
              {{"fixed_window", detector::LagMode::fixed_window}, {"k_window", detector::LagMode::k_window}});
    read(n, "denominator_epsilon", d.denominator_epsilon, path);
    read(n, "ratio_epsilon", d.ratio_epsilon, path);
    read(n, "reporting_latency_s", d.reporting_latency, path);
    read(n, "communication_latency_s", d.communication_latency, path);
}

void emit_detector(YAML::Emitter &e, const detector::DetectorConfig &d) {
    e << YAML::BeginMap;
    e << YAML::Key << "frequency_hz" << YAML::Value << num(1.0 / d.cycle_period);
    e << YAML::Key << "ma_window_cycles" << YAML::Value << num(d.ma_window_cycles);
    e << YAML::Key << "k_set" << YAML::Value << YAML::Flow << d.k_set;
    e << YAML::Key << "control" << YAML::Value << to_string(d.control);
    e << YAML::Key << "step_change_threshold" << YAML::Value << num(d.step_change_threshold);
    e << YAML::Key << "restart_trigger" << YAML::Value << to_string(d.restart_trigger);
    e << YAML::Key << "lag_mode" << YAML::Value << to_string(d.lag_mode);
    e << YAML::Key << "denominator_epsilon" << YAML::Value << num(d.denominator_epsilon);
    e << YAML::Key << "ratio_epsilon" << YAML::Value << num(d.ratio_epsilon);
    e << YAML::Key << "reporting_latency_s" << YAML::Value << num(d.reporting_latency);
    e << YAML::Key << "communication_latency_s" << YAML::Value << num(d.communication_latency);
    e << YAML::EndMap;
}

void emit_header(YAML::Emitter &e, const std::string &schema) {
    e << YAML::BeginMap;
    e << YAML::Key << "schema" << YAML::Value << num(schema);
}

} // namespace

// ---- run ----

sim::RunSpec RunConfig::to_run_spec() const {
    const thermal::ConductorCatalogue catalogue =
        catalogue_file.empty() ? thermal::default_catalogue() : load_catalogue(catalogue_file);
    const thermal::Conductor &cond = catalogue.at(conductor);
    sim::RunSpec spec;
    spec.seed = seed;
    spec.duration = duration;
    spec.sample_rate = sample_rate;
    spec.segment.length_km = length_km;
    spec.segment.r_ref = cond.r20_per_m * length_km * 1000.0;
    spec.segment.x = x_over_r * spec.segment.r_ref;
    spec.segment.b_shunt = b_shunt;
    spec.segment.alpha = alpha;
    spec.segment.t_ref = t_ref;

    if (!(nominal_voltage_kv > 0.0)) {
        throw ValidationError("operating.nominal_voltage_kv must be positive");
    }
    if (!(power_factor > 0.0 && power_factor <= 1.0)) {
        throw ValidationError("operating.power_factor must lie in (0, 1]");
    }
    if (!(pf_correction >= 0.0 && pf_correction <= 1.0)) {
        throw ValidationError("operating.pf_correction must lie in [0, 1]");
    }
    if (load_current < 0.0) {
        throw ValidationError("operating.load_current_a must be >= 0");
    }
    const double v = nominal_voltage_kv * 1e3 / std::sqrt(3.0);
    const double sin_phi = std::sqrt(std::max(0.0, 1.0 - power_factor * power_factor));
    spec.operating.source_voltage = phasor::Phasor{v, 0.0};
    spec.operating.load_p = v * load_current * power_factor;
    spec.operating.load_q = v * load_current * sin_phi;
    spec.operating.shunt_compensation = pf_correction * spec.operating.load_q / (v * v);
    for (const auto &s : load_steps) {
        spec.load_steps.push_back(sim::LoadStep{s.time, v * s.current * power_factor, v * s.current * sin_phi});
    }
    spec.switches = switches;

    spec.thermal = catalogue.params_for(conductor);
    spec.weather = thermal::Weather{wind_speed, ambient};
    spec.initial_t_c = initial_t_c;
    spec.preheat = preheat;
    spec.fire.active = fire_active;
    spec.fire.distance = fire_distance;
    spec.fire.ignition_time = ignition_time;
    if (!calibration_table.empty()) {
        spec.calibration = thermal::calibrate_from_table(io::read_fire_table_file(calibration_table));
    }
    spec.measurement = measurement;
    spec.timing_fault = timing_fault;
    spec.detector = detector;
    return spec;
}

RunConfig parse_run_config(const std::string &text, const std::string &base_dir) {
    const YAML::Node root = parse_root(text);
    check_keys(root, "",
               {"schema", "seed", "duration_s", "sample_rate_hz", "line", "operating", "thermal", "weather", "fire",
                "measurement", "timing_fault", "detector"});
    check_schema(root, "firedetect.run v1");
    RunConfig c;
    read(root, "seed", c.seed, "");
    read(root, "duration_s", c.duration, "");
    read(root, "sample_rate_hz", c.sample_rate, "");

    const YAML::Node line = root["line"];
    check_keys(line, "line", {"conductor", "catalogue", "length_km", "x_over_r", "b_shunt_s", "alpha", "t_ref_c"});
    read(line, "conductor", c.conductor, "line");
    read(line, "catalogue", c.catalogue_file, "line");
    c.catalogue_file = resolve(base_dir, c.catalogue_file);
    read(line, "length_km", c.length_km, "line");
    read(line, "x_over_r", c.x_over_r, "line");
    read(line, "b_shunt_s", c.b_shunt, "line");
    read(line, "alpha", c.alpha, "line");
    read(line, "t_ref_c", c.t_ref, "line");
    (c.catalogue_file.empty() ? thermal::default_catalogue() : load_catalogue(c.catalogue_file)).at(c.conductor);

    const YAML::Node op = root["operating"];
    check_keys(op, "operating",
               {"nominal_voltage_kv", "load_current_a", "power_factor", "pf_correction", "load_steps", "switches"});
    read(op, "nominal_voltage_kv", c.nominal_voltage_kv, "operating");
    read(op, "load_current_a", c.load_current, "operating");
    read(op, "power_factor", c.power_factor, "operating");
    read(op, "pf_correction", c.pf_correction, "operating");
    if (op && op["load_steps"]) {
        std::size_t i = 0;
        for (const auto &s : op["load_steps"]) {
            const std::string p = "operating.load_steps[" + std::to_string(i++) + "]";
            check_keys(s, p, {"time_s", "current_a"});
            LoadStepConfig ls;
            read(s, "time_s", ls.time, p);
            read(s, "current_a", ls.current, p);
            c.load_steps.push_back(ls);
        }
    }
    if (op && op["switches"]) {
        std::size_t i = 0;
        for (const auto &s : op["switches"]) {
            const std::string p = "operating.switches[" + std::to_string(i++) + "]";
            check_keys(s, p, {"time_s", "kind", "value"});
            sim::CompensationSwitch sw;
            read(s, "time_s", sw.time, p);
            read_enum(s, "kind", sw.kind, p,
                      {{"series", sim::CompensationKind::series}, {"shunt", sim::CompensationKind::shunt}});
            read(s, "value", sw.value, p);
            c.switches.push_back(sw);
        }
    }

    const YAML::Node th = root["thermal"];
    check_keys(th, "thermal", {"initial_t_c", "preheat"});
    read(th, "preheat", c.preheat, "thermal");
    if (th && th["initial_t_c"] && !th["initial_t_c"].IsNull()) {
        std::string s;
        read(th, "initial_t_c", s, "thermal");
        if (s != "steady_state") {
            double v = 0.0;
            read(th, "initial_t_c", v, "thermal");
            c.initial_t_c = v;
        }
    }

    const YAML::Node w = root["weather"];
    check_keys(w, "weather", {"wind_speed_ms", "ambient_c"});
    read(w, "wind_speed_ms", c.wind_speed, "weather");
    read(w, "ambient_c", c.ambient, "weather");

    const YAML::Node f = root["fire"];
    check_keys(f, "fire", {"active", "distance_m", "ignition_time_s", "calibration_table"});
    read(f, "active", c.fire_active, "fire");
    read(f, "distance_m", c.fire_distance, "fire");
    read(f, "ignition_time_s", c.ignition_time, "fire");
    read(f, "calibration_table", c.calibration_table, "fire");
    c.calibration_table = resolve(base_dir, c.calibration_table);

    read_measurement(root["measurement"], "measurement", c.measurement, true);

    const YAML::Node tf = root["timing_fault"];
    check_keys(tf, "timing_fault", {"kind", "side", "onset_s", "delay_s"});
    read_enum(tf, "kind", c.timing_fault.kind, "timing_fault",
              {{"none", measurement::TimingFaultKind::none},
               {"frozen", measurement::TimingFaultKind::frozen},
               {"delay", measurement::TimingFaultKind::delay}});
    read_enum(tf, "side", c.timing_fault.side, "timing_fault",
              {{"sending", measurement::Terminal::sending}, {"receiving", measurement::Terminal::receiving}});
    read(tf, "onset_s", c.timing_fault.onset, "timing_fault");
    read(tf, "delay_s", c.timing_fault.delay, "timing_fault");

    read_detector(root["detector"], "detector", c.detector);
    return c;
}

RunConfig load_run_config(const std::string &path) { return parse_run_config(slurp(path), dir_of(path)); }

std::string emit_run_config(const RunConfig &c) {
    YAML::Emitter e;
    emit_header(e, "firedetect.run v1");
    e << YAML::Key << "seed" << YAML::Value << num(c.seed);
    e << YAML::Key << "duration_s" << YAML::Value << num(c.duration);
    e << YAML::Key << "sample_rate_hz" << YAML::Value << num(c.sample_rate);
    e << YAML::Key << "line" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "conductor" << YAML::Value << num(c.conductor);
    e << YAML::Key << "catalogue" << YAML::Value << c.catalogue_file;
    e << YAML::Key << "length_km" << YAML::Value << num(c.length_km);
    e << YAML::Key << "x_over_r" << YAML::Value << num(c.x_over_r);
    e << YAML::Key << "b_shunt_s" << YAML::Value << num(c.b_shunt);
    e << YAML::Key << "alpha" << YAML::Value << num(c.alpha);
    e << YAML::Key << "t_ref_c" << YAML::Value << num(c.t_ref);
    e << YAML::EndMap;
    e << YAML::Key << "operating" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "nominal_voltage_kv" << YAML::Value << num(c.nominal_voltage_kv);
    e << YAML::Key << "load_current_a" << YAML::Value << num(c.load_current);
    e << YAML::Key << "power_factor" << YAML::Value << num(c.power_factor);
    e << YAML::Key << "pf_correction" << YAML::Value << num(c.pf_correction);
    e << YAML::Key << "load_steps" << YAML::Value << YAML::BeginSeq;
    for (const auto &s : c.load_steps) {
        e << YAML::Flow << YAML::BeginMap << YAML::Key << "time_s" << YAML::Value << num(s.time) << YAML::Key
          << "current_a" << YAML::Value << num(s.current) << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "switches" << YAML::Value << YAML::BeginSeq;
    for (const auto &s : c.switches) {
        e << YAML::Flow << YAML::BeginMap << YAML::Key << "time_s" << YAML::Value << num(s.time) << YAML::Key << "kind"
          << YAML::Value << to_string(s.kind) << YAML::Key << "value" << YAML::Value << num(s.value) << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::EndMap;
    e << YAML::Key << "thermal" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "initial_t_c" << YAML::Value;
    if (c.initial_t_c) {
        e << num(*c.initial_t_c);
    } else {
        e << "steady_state";
    }
    e << YAML::Key << "preheat" << YAML::Value << c.preheat;
    e << YAML::EndMap;
    e << YAML::Key << "weather" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "wind_speed_ms" << YAML::Value << num(c.wind_speed);
    e << YAML::Key << "ambient_c" << YAML::Value << num(c.ambient);
    e << YAML::EndMap;
    e << YAML::Key << "fire" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "active" << YAML::Value << num(c.fire_active);
    e << YAML::Key << "distance_m" << YAML::Value << num(c.fire_distance);
    e << YAML::Key << "ignition_time_s" << YAML::Value << num(c.ignition_time);
    e << YAML::Key << "calibration_table" << YAML::Value << num(c.calibration_table);
    e << YAML::EndMap;
    e << YAML::Key << "measurement" << YAML::Value;
    emit_measurement(e, c.measurement, true);
    e << YAML::Key << "timing_fault" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << to_string(c.timing_fault.kind);
    e << YAML::Key << "side" << YAML::Value << to_string(c.timing_fault.side);
    e << YAML::Key << "onset_s" << YAML::Value << num(c.timing_fault.onset);
    e << YAML::Key << "delay_s" << YAML::Value << num(c.timing_fault.delay);
    e << YAML::EndMap;
    e << YAML::Key << "detector" << YAML::Value;
    emit_detector(e, c.detector);
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

// ---- sweep ----

mc::SweepConfig parse_sweep_config(const std::string &text, const std::string &base_dir) {
    const YAML::Node root = parse_root(text);
    check_keys(root, "",
               {"schema", "seed", "tests_per_cell", "subsample", "conductor", "catalogue", "calibration_table",
                "nominal_voltage_kv", "power_factor",
                "x_over_r", "shunt_susceptance_s_per_km", "fire_duration_s", "no_fire_probability", "i_err_high_ratio",
                "duration_s", "sample_rate_hz", "grid", "measurement", "detector", "filters"});
    check_schema(root, "firedetect.sweep v1");
    mc::SweepConfig c;
    read(root, "seed", c.seed, "");
    read(root, "tests_per_cell", c.tests_per_cell, "");
    std::string sub;
    read(root, "subsample", sub, "");
    if (!sub.empty()) {
        c.subsample = mc::Subsample::parse(sub);
    }
    read(root, "conductor", c.conductor, "");
    std::string catalogue_file, table;
    read(root, "catalogue", catalogue_file, "");
    if (!catalogue_file.empty()) {
        c.catalogue = load_catalogue(resolve(base_dir, catalogue_file));
    }
    read(root, "calibration_table", table, "");
    if (!table.empty()) {
        c.calibration = thermal::calibrate_from_table(io::read_fire_table_file(resolve(base_dir, table)));
    }
    double kv = c.nominal_voltage_ll / 1e3;
    read(root, "nominal_voltage_kv", kv, "");
    c.nominal_voltage_ll = kv * 1e3;
    read(root, "power_factor", c.power_factor, "");
    std::vector<double> xr;
    read(root, "x_over_r", xr, "");
    if (!xr.empty()) {
        if (xr.size() != 2) {
            throw ValidationError("x_over_r: expected [min, max]");
        }
        c.x_over_r_min = xr[0];
        c.x_over_r_max = xr[1];
    }
    read(root, "shunt_susceptance_s_per_km", c.shunt_susceptance_per_km, "");
    std::vector<double> fd;
    read(root, "fire_duration_s", fd, "");
    if (!fd.empty()) {
        if (fd.size() != 2) {
            throw ValidationError("fire_duration_s: expected [min, max]");
        }
        c.fire_duration_min = fd[0];
        c.fire_duration_max = fd[1];
    }
    read(root, "no_fire_probability", c.no_fire_probability, "");
    read(root, "i_err_high_ratio", c.i_err_high_ratio, "");
    read(root, "duration_s", c.duration, "");
    read(root, "sample_rate_hz", c.sample_rate, "");

    const YAML::Node grid = root["grid"];
    std::set<std::string> dims(mc::dim_names().begin(), mc::dim_names().end());
    check_keys(grid, "grid", dims);
    for (int d = 0; d < mc::kDims; ++d) {
        const std::string &name = mc::dim_names()[static_cast<std::size_t>(d)];
        const YAML::Node g = grid ? grid[name] : YAML::Node();
        const std::string p = "grid." + name;
        check_keys(g, p, {"lo", "hi", "intervals"});
        mc::Range &r = c.grid.dims[static_cast<std::size_t>(d)];
        read(g, "lo", r.lo, p);
        read(g, "hi", r.hi, p);
        read(g, "intervals", r.intervals, p);
    }
    read_measurement(root["measurement"], "measurement", c.measurement, false);
    read_detector(root["detector"], "detector", c.detector);
    const YAML::Node filt = root["filters"];
    check_keys(filt, "filters", {"delta_tc_c", "v_err_pu", "delta_tc_interval"});
    std::string interval;
    read(filt, "delta_tc_interval", interval, "filters");
    if (!interval.empty()) {
        if (interval != "since_ignition" && interval != "window") {
            throw ValidationError("filters.delta_tc_interval: '" + interval + "' is not one of since_ignition, window");
        }
        c.delta_tc_since_ignition = interval == "since_ignition";
    }
    read(filt, "delta_tc_c", c.delta_tc_filter, "filters");
    read(filt, "v_err_pu", c.v_err_filter, "filters");
    c.validate();
    return c;
}

mc::SweepConfig load_sweep_config(const std::string &path) { return parse_sweep_config(slurp(path), dir_of(path)); }

std::string emit_sweep_config(const mc::SweepConfig &c) {
    YAML::Emitter e;
    emit_header(e, "firedetect.sweep v1");
    e << YAML::Key << "seed" << YAML::Value << num(c.seed);
    e << YAML::Key << "tests_per_cell" << YAML::Value << num(c.tests_per_cell);
    e << YAML::Key << "subsample" << YAML::Value << num(c.subsample.to_string());
    e << YAML::Key << "conductor" << YAML::Value << num(c.conductor);
    e << YAML::Key << "nominal_voltage_kv" << YAML::Value << num(c.nominal_voltage_ll / 1e3);
    e << YAML::Key << "power_factor" << YAML::Value << num(c.power_factor);
    e << YAML::Key << "x_over_r" << YAML::Value << YAML::Flow << num(std::vector<double>{c.x_over_r_min, c.x_over_r_max});
    e << YAML::Key << "shunt_susceptance_s_per_km" << YAML::Value << num(c.shunt_susceptance_per_km);
    e << YAML::Key << "fire_duration_s" << YAML::Value << YAML::Flow
      << num(std::vector<double>{c.fire_duration_min, c.fire_duration_max});
    e << YAML::Key << "no_fire_probability" << YAML::Value << num(c.no_fire_probability);
    e << YAML::Key << "i_err_high_ratio" << YAML::Value << num(c.i_err_high_ratio);
    e << YAML::Key << "duration_s" << YAML::Value << num(c.duration);
    e << YAML::Key << "sample_rate_hz" << YAML::Value << num(c.sample_rate);
    e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    for (int d = 0; d < mc::kDims; ++d) {
        const mc::Range &r = c.grid.dims[static_cast<std::size_t>(d)];
        e << YAML::Key << mc::dim_names()[static_cast<std::size_t>(d)] << YAML::Value << YAML::Flow << YAML::BeginMap
          << YAML::Key << "lo" << YAML::Value << num(r.lo) << YAML::Key << "hi" << YAML::Value << num(r.hi) << YAML::Key
          << "intervals" << YAML::Value << num(r.intervals) << YAML::EndMap;
    }
    e << YAML::EndMap;
    e << YAML::Key << "measurement" << YAML::Value;
    emit_measurement(e, c.measurement, false);
    e << YAML::Key << "detector" << YAML::Value;
    emit_detector(e, c.detector);
    e << YAML::Key << "filters" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "delta_tc_c" << YAML::Value << num(c.delta_tc_filter);
    e << YAML::Key << "v_err_pu" << YAML::Value << num(c.v_err_filter);
    e << YAML::Key << "delta_tc_interval" << YAML::Value
      << (c.delta_tc_since_ignition ? "since_ignition" : "window");
    e << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

// ---- conductor catalogue ----

namespace {

// name, member pointer pairs keep parse and emit in step
const std::vector<std::pair<const char *, double thermal::ThermalConstants::*>> &constant_fields() {
    using K = thermal::ThermalConstants;
    static const std::vector<std::pair<const char *, double K::*>> fields{
        {"elevation_m", &K::elevation_m},
        {"wind_angle_factor", &K::wind_angle_factor},
        {"forced_c0", &K::forced_c0},
        {"forced_c1", &K::forced_c1},
        {"forced_exponent", &K::forced_exponent},
        {"natural_coeff", &K::natural_coeff},
        {"natural_diameter_exponent", &K::natural_diameter_exponent},
        {"natural_dt_exponent", &K::natural_dt_exponent},
        {"radiation_coeff", &K::radiation_coeff},
        {"viscosity_a", &K::viscosity_a},
        {"viscosity_b", &K::viscosity_b},
        {"density_d0", &K::density_d0},
        {"density_d1", &K::density_d1},
        {"density_d2", &K::density_d2},
        {"density_d3", &K::density_d3},
        {"conductivity_k0", &K::conductivity_k0},
        {"conductivity_k1", &K::conductivity_k1},
        {"conductivity_k2", &K::conductivity_k2},
    };
    return fields;
}

} // namespace

thermal::ConductorCatalogue parse_catalogue(const std::string &text) {
    const YAML::Node root = parse_root(text);
    check_keys(root, "", {"schema", "constants", "rating", "conductors"});
    check_schema(root, "firedetect.conductors v1");
    thermal::ConductorCatalogue cat;
    const YAML::Node k = root["constants"];
    std::set<std::string> names;
    for (const auto &[name, member] : constant_fields()) {
        names.insert(name);
    }
    check_keys(k, "constants", names);
    for (const auto &[name, member] : constant_fields()) {
        read(k, name, cat.constants.*member, "constants");
    }
    const YAML::Node r = root["rating"];
    check_keys(r, "rating", {"max_conductor_temp_c", "ambient_c", "wind_speed_ms"});
    read(r, "max_conductor_temp_c", cat.rating.max_conductor_temp, "rating");
    read(r, "ambient_c", cat.rating.ambient_temp, "rating");
    read(r, "wind_speed_ms", cat.rating.wind_speed, "rating");
    const YAML::Node list = root["conductors"];
    if (!list || !list.IsMap() || list.size() == 0) {
        throw ValidationError("conductors: expected a non-empty mapping of name to parameters");
    }
    for (const auto &kv : list) {
        const std::string name = kv.first.as<std::string>();
        const std::string p = "conductors." + name;
        check_keys(kv.second, p, {"diameter_m", "m_cp", "emissivity", "r20_ohm_per_m", "alpha"});
        thermal::Conductor c;
        c.name = name;
        read(kv.second, "diameter_m", c.diameter, p);
        read(kv.second, "m_cp", c.m_cp, p);
        read(kv.second, "emissivity", c.emissivity, p);
        read(kv.second, "r20_ohm_per_m", c.r20_per_m, p);
        read(kv.second, "alpha", c.alpha, p);
        if (!(c.diameter > 0.0 && c.m_cp > 0.0 && c.r20_per_m > 0.0)) {
            throw ValidationError(p + ": diameter_m, m_cp and r20_ohm_per_m must be > 0");
        }
        if (!(c.emissivity >= 0.2 && c.emissivity <= 0.95)) {
            throw ValidationError(p + ".emissivity must lie in [0.2, 0.95]");
        }
        cat.conductors[name] = c;
    }
    return cat;
}

thermal::ConductorCatalogue load_catalogue(const std::string &path) { return parse_catalogue(slurp(path)); }

std::string emit_catalogue(const thermal::ConductorCatalogue &cat) {
    YAML::Emitter e;
    emit_header(e, "firedetect.conductors v1");
    e << YAML::Key << "constants" << YAML::Value << YAML::BeginMap;
    for (const auto &[name, member] : constant_fields()) {
        e << YAML::Key << name << YAML::Value << num(cat.constants.*member);
    }
    e << YAML::EndMap;
    e << YAML::Key << "rating" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "max_conductor_temp_c" << YAML::Value << num(cat.rating.max_conductor_temp);
    e << YAML::Key << "ambient_c" << YAML::Value << num(cat.rating.ambient_temp);
    e << YAML::Key << "wind_speed_ms" << YAML::Value << num(cat.rating.wind_speed);
    e << YAML::EndMap;
    e << YAML::Key << "conductors" << YAML::Value << YAML::BeginMap;
    for (const auto &[name, c] : cat.conductors) {
        e << YAML::Key << name << YAML::Value << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "diameter_m" << YAML::Value << num(c.diameter);
        e << YAML::Key << "m_cp" << YAML::Value << num(c.m_cp);
        e << YAML::Key << "emissivity" << YAML::Value << num(c.emissivity);
        e << YAML::Key << "r20_ohm_per_m" << YAML::Value << num(c.r20_per_m);
        e << YAML::Key << "alpha" << YAML::Value << num(c.alpha);
        e << YAML::EndMap;
    }
    e << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

// ---- rules ----

RulesConfig parse_rules_config(const std::string &text) {
    const YAML::Node root = parse_root(text);
    check_keys(root, "", {"schema", "label", "exclude", "min_leaf", "max_depth", "purity_stop", "threshold_penalty",
                            "min_purity"});
    check_schema(root, "firedetect.rules_config v1");
    RulesConfig c;
    read(root, "label", c.label, "");
    read(root, "exclude", c.exclude, "");
    read(root, "min_leaf", c.train.min_leaf, "");
    read(root, "max_depth", c.train.max_depth, "");
    read(root, "purity_stop", c.train.purity_stop, "");
    read(root, "threshold_penalty", c.train.threshold_penalty, "");
    read(root, "min_purity", c.min_purity, "");
    c.train.validate();
    if (!(c.min_purity >= 0.0 && c.min_purity <= 1.0)) {
        throw ValidationError("min_purity must lie in [0, 1]");
    }
    return c;
}

RulesConfig load_rules_config(const std::string &path) { return parse_rules_config(slurp(path)); }

std::string emit_rules_config(const RulesConfig &c) {
    YAML::Emitter e;
    emit_header(e, "firedetect.rules_config v1");
    e << YAML::Key << "label" << YAML::Value << num(c.label);
    e << YAML::Key << "exclude" << YAML::Value << YAML::Flow << c.exclude;
    e << YAML::Key << "min_leaf" << YAML::Value << num(c.train.min_leaf);
    e << YAML::Key << "max_depth" << YAML::Value << num(c.train.max_depth);
    e << YAML::Key << "purity_stop" << YAML::Value << num(c.train.purity_stop);
    e << YAML::Key << "threshold_penalty" << YAML::Value << c.train.threshold_penalty;
    e << YAML::Key << "min_purity" << YAML::Value << num(c.min_purity);
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

} // namespace firedetect::config
