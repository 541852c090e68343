#include "firedetect/io.hpp"

#include "firedetect/config.hpp"
#include "firedetect/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace firedetect::io {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string schema_line(const std::string &name, int version) {
    return "# schema: " + name + " v" + std::to_string(version);
}

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string &s, double &out) {
    const std::string t = trim(s);
    if (t.empty()) {
        return false;
    }
    const char *first = t.data();
    if (*first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, t.data() + t.size(), out);
    return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_json(const std::optional<double> &v) { return v ? number_or_null(*v) : json(nullptr); }

std::optional<double> optional_from(const json &j, const char *key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<double>();
}

void require_schema(const json &j, const std::string &expected) {
    if (!j.is_object() || !j.contains("schema") || j.at("schema") != expected) {
        throw ValidationError("expected schema '" + expected + "'");
    }
}

json parse_json(const std::string &text) {
    try {
        return json::parse(text);
    } catch (const json::exception &e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what());
    }
}

} // namespace

std::size_t CsvTable::column(const std::string &name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw ValidationError("missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

CsvTable read_csv_table(std::istream &in) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = trim(line);
        if (s.empty()) {
            continue;
        }
        if (s.front() == '#') {
            const std::string tag = "# schema:";
            if (!have_header && s.rfind(tag, 0) == 0) {
                t.schema = trim(s.substr(tag.size()));
            }
            continue;
        }
        auto fields = split_csv_line(s);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    return t;
}

std::string csv_to_json(const CsvTable &table) {
    json j;
    j["schema"] = table.schema;
    j["columns"] = table.header;
    j["rows"] = json::array();
    for (const auto &row : table.rows) {
        json r = json::array();
        for (const auto &f : row) {
            double v = 0.0;
            if (f.empty()) {
                r.push_back(nullptr);
            } else if (f == "true" || f == "false") {
                r.push_back(f == "true");
            } else if (parse_number(f, v) && std::isfinite(v)) {
                r.push_back(v);
            } else {
                r.push_back(f);
            }
        }
        j["rows"].push_back(std::move(r));
    }
    return j.dump() + "\n";
}

// ---- fire calibration ----

std::vector<thermal::TableSample> read_fire_table(std::istream &in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    std::vector<std::string> header;
    std::vector<thermal::TableSample> rows;
    std::vector<std::string> bad;
    std::size_t cd = 0, ct = 0, cv = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string s = trim(lines[i]);
        if (s.empty() || s.front() == '#') {
            continue;
        }
        const auto fields = split_csv_line(s);
        if (header.empty()) {
            header = fields;
            auto find = [&](const std::string &name) {
                const auto it = std::find(header.begin(), header.end(), name);
                if (it == header.end()) {
                    throw ValidationError("fire table: missing column '" + name + "'");
                }
                return static_cast<std::size_t>(it - header.begin());
            };
            cd = find("d_m");
            ct = find("t_f_s");
            cv = find("delta_ta_c");
            continue;
        }
        thermal::TableSample row;
        if (fields.size() != header.size() || !parse_number(fields[cd], row.d) || !parse_number(fields[ct], row.t_f) ||
            !parse_number(fields[cv], row.delta_ta)) {
            bad.push_back("line " + std::to_string(i + 1) + ": " + s);
            continue;
        }
        rows.push_back(row);
    }
    if (header.empty() || (rows.empty() && bad.empty())) {
        throw ValidationError("fire table is empty");
    }
    if (!bad.empty()) {
        throw CalibrationError("fire table has malformed rows", bad);
    }
    return rows;
}

std::vector<thermal::TableSample> read_fire_table_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_fire_table(in);
}

void write_fire_table(std::ostream &out, const std::vector<thermal::TableSample> &rows) {
    out << schema_line("firedetect.fire_table", 1) << "\n";
    out << "d_m,t_f_s,delta_ta_c\n";
    for (const auto &r : rows) {
        out << format_double(r.d) << ',' << format_double(r.t_f) << ',' << format_double(r.delta_ta) << '\n';
    }
}

std::string calibration_to_json(const thermal::FireCalibration &cal) {
    json j;
    j["schema"] = "firedetect.calibration v1";
    j["exponent"] = cal.exponent;
    j["grid"] = json::array();
    for (const auto &p : cal.distance_grid) {
        j["grid"].push_back({{"d_m", p.d}, {"f", p.f}});
    }
    return j.dump(2) + "\n";
}

thermal::FireCalibration calibration_from_json(const std::string &text) {
    const json j = parse_json(text);
    require_schema(j, "firedetect.calibration v1");
    thermal::FireCalibration cal;
    try {
        cal.exponent = j.at("exponent").get<double>();
        for (const auto &p : j.at("grid")) {
            cal.distance_grid.push_back({p.at("d_m").get<double>(), p.at("f").get<double>()});
        }
    } catch (const json::exception &e) {
        throw ValidationError(std::string("calibration: ") + e.what());
    }
    if (cal.distance_grid.empty()) {
        throw ValidationError("calibration: empty grid");
    }
    for (std::size_t i = 0; i + 1 < cal.distance_grid.size(); ++i) {
        if (!(cal.distance_grid[i].d < cal.distance_grid[i + 1].d &&
              cal.distance_grid[i].f > cal.distance_grid[i + 1].f)) {
            throw ValidationError("calibration: grid must be increasing in d and decreasing in f");
        }
    }
    return cal;
}

Reproduction reproduce_table(const std::vector<thermal::TableSample> &rows, double fit_t_f,
                             thermal::FireCalibration *fitted) {
    std::vector<thermal::TableSample> fit_rows;
    for (const auto &r : rows) {
        if (fit_t_f <= 0.0 || r.t_f == fit_t_f) {
            fit_rows.push_back(r);
        }
    }
    if (fit_rows.empty()) {
        throw ValidationError("no table rows at t_f = " + format_double(fit_t_f) + " s");
    }
    const thermal::FireCalibration cal = thermal::calibrate_from_table(fit_rows);
    Reproduction rep;
    for (const auto &r : rows) {
        ReproductionRow row;
        row.sample = r;
        row.fitted = fit_t_f <= 0.0 || r.t_f == fit_t_f;
        row.model = thermal::fire_delta_ta(cal, r.d, r.t_f);
        row.residual = row.model / r.delta_ta - 1.0;
        rep.max_residual = std::max(rep.max_residual, std::abs(row.residual));
        if (!row.fitted) {
            rep.max_held_out = std::max(rep.max_held_out, std::abs(row.residual));
        }
        rep.rows.push_back(row);
    }
    if (fitted) {
        *fitted = cal;
    }
    return rep;
}

void write_reproduction_csv(std::ostream &out, const Reproduction &r) {
    out << schema_line("firedetect.fire_reproduction", 1) << "\n";
    out << "d_m,t_f_s,table_delta_ta_c,model_delta_ta_c,residual_pct,fitted\n";
    for (const auto &row : r.rows) {
        out << format_double(row.sample.d) << ',' << format_double(row.sample.t_f) << ','
            << format_double(row.sample.delta_ta) << ',' << format_double(row.model) << ','
            << format_double(100.0 * row.residual) << ',' << (row.fitted ? "true" : "false") << '\n';
    }
}

// ---- single runs ----

void write_trace_csv(std::ostream &out, const sim::RunTrace &trace) {
    out << schema_line("firedetect.trace", 1) << "\n";
    out << "t,tan_delta,ma,delta6,delta4,delta3,control1,control2,tan_delta_valid,ma_defined,switched,"
           "t_c,t_a,resistance,true_tan_delta,p_r,q_r,"
           "v_s_mag,v_s_ang,v_r_mag,v_r_ang,i_s_mag,i_s_ang,i_r_mag,i_r_ang,"
           "meas_v_s_mag,meas_v_s_ang,meas_i_s_mag,meas_i_s_ang,meas_v_r_mag,meas_v_r_ang,meas_i_r_mag,meas_i_r_ang\n";
    std::string line;
    auto num = [&](double v) {
        line += format_double(v);
        line += ',';
    };
    auto opt = [&](bool ok, double v) {
        if (ok) {
            line += format_double(v);
        }
        line += ',';
    };
    auto flag = [&](bool b) {
        line += b ? '1' : '0';
        line += ',';
    };
    auto ph = [&](const phasor::Phasor &p) {
        num(p.magnitude);
        num(p.angle);
    };
    for (const auto &r : trace.records) {
        line.clear();
        num(r.t);
        opt(r.tan_delta_valid, r.tan_delta);
        opt(r.ma_defined, r.ma);
        for (int k : {6, 4, 3}) {
            const auto v = r.slopes.get(k);
            opt(v.has_value(), v.value_or(0.0));
        }
        flag(r.control1);
        flag(r.control2);
        flag(r.tan_delta_valid);
        flag(r.ma_defined);
        flag(r.switched);
        num(r.t_c);
        num(r.t_a);
        num(r.resistance);
        num(r.true_tan_delta);
        num(r.p_r);
        num(r.q_r);
        ph(r.v_s);
        ph(r.v_r);
        ph(r.i_s);
        ph(r.i_r);
        ph(r.meas_v_s);
        ph(r.meas_i_s);
        ph(r.meas_v_r);
        ph(r.meas_i_r);
        line.back() = '\n';
        out << line;
    }
}

void write_measurement_csv(std::ostream &out, const sim::RunTrace &trace) {
    out << schema_line("firedetect.measurements", 1) << "\n";
    out << "t_s,terminal,v_mag,v_ang,i_mag,i_ang\n";
    for (const auto &r : trace.records) {
        const std::string t = format_double(r.t);
        out << t << ",S," << format_double(r.meas_v_s.magnitude) << ',' << format_double(r.meas_v_s.angle) << ','
            << format_double(r.meas_i_s.magnitude) << ',' << format_double(r.meas_i_s.angle) << '\n';
        out << t << ",R," << format_double(r.meas_v_r.magnitude) << ',' << format_double(r.meas_v_r.angle) << ','
            << format_double(r.meas_i_r.magnitude) << ',' << format_double(r.meas_i_r.angle) << '\n';
    }
}

namespace {

json slopes_json(const detector::SlopeValues &s) {
    json j = json::object();
    for (int k = detector::kMinLag; k <= detector::kMaxLag; ++k) {
        if (const auto v = s.get(k)) {
            j[std::to_string(k)] = number_or_null(*v);
        }
    }
    return j;
}

json slope_map_json(const std::map<int, double> &m) {
    json j = json::object();
    for (const auto &[k, v] : m) {
        j[std::to_string(k)] = number_or_null(v);
    }
    return j;
}

std::map<int, double> slope_map_from(const json &j) {
    std::map<int, double> m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        m[std::stoi(it.key())] = it.value().is_null() ? std::nan("") : it.value().get<double>();
    }
    return m;
}

json trip_json(const sim::TripEvent &t) {
    return json{{"control", config::to_string(t.control)},
                {"time_s", t.time},
                {"reported_time_s", t.reported_time},
                {"slopes", slope_map_json(t.slope_values)}};
}

} // namespace

std::string trips_to_json(const std::vector<sim::TripEvent> &trips) {
    json j;
    j["schema"] = "firedetect.trips v1";
    j["trips"] = json::array();
    for (const auto &t : trips) {
        j["trips"].push_back(trip_json(t));
    }
    return j.dump(2) + "\n";
}

std::string summary_to_json(const sim::RunTrace &trace, const sim::RunSpec &spec) {
    const sim::RunSummary &s = trace.summary;
    json j;
    j["schema"] = "firedetect.run_summary v1";
    j["seed"] = spec.seed;
    j["duration_s"] = spec.duration;
    j["sample_rate_hz"] = spec.sample_rate;
    j["control"] = config::to_string(spec.detector.control);
    j["latency_budget_s"] = spec.detector.latency_budget();
    j["discarded"] = s.discarded;
    j["discard_reason"] = s.discard_reason;
    j["fire_present"] = s.fire_present;
    j["delta_ta_end_c"] = number_or_null(s.delta_ta_end);
    j["t_c_initial_c"] = number_or_null(s.t_c_initial);
    j["t_c_start_c"] = number_or_null(s.t_c_start);
    j["t_c_end_c"] = number_or_null(s.t_c_end);
    j["delta_tc_c"] = number_or_null(s.delta_tc);
    j["apparent_power_r_va"] = number_or_null(s.apparent_power_r);
    j["current_start_a"] = number_or_null(s.current_start);
    j["control1_time_s"] = optional_json(s.control1_time);
    j["control2_time_s"] = optional_json(s.control2_time);
    j["decision"] = {{"tripped", s.decision.tripped},
                     {"time_s", s.decision.time},
                     {"rule", config::to_string(s.decision.rule_fired)},
                     {"slopes", slope_map_json(s.decision.slope_values)}};
    j["reported_time_s"] = optional_json(s.reported_time);
    j["final_slopes"] = slopes_json(s.final_slopes);
    j["samples"] = s.samples;
    j["invalid_samples"] = s.invalid_samples;
    j["restarts"] = s.restarts;
    j["trips"] = json::array();
    for (const auto &t : trace.trips) {
        j["trips"].push_back(trip_json(t));
    }
    return j.dump(2) + "\n";
}

sim::RunSummary summary_from_json(const std::string &text) {
    const json j = parse_json(text);
    require_schema(j, "firedetect.run_summary v1");
    sim::RunSummary s;
    try {
        auto num = [&](const char *key) {
            const json &v = j.at(key);
            return v.is_null() ? std::nan("") : v.get<double>();
        };
        s.discarded = j.at("discarded").get<bool>();
        s.discard_reason = j.at("discard_reason").get<std::string>();
        s.fire_present = j.at("fire_present").get<bool>();
        s.delta_ta_end = num("delta_ta_end_c");
        s.t_c_initial = num("t_c_initial_c");
        s.t_c_start = num("t_c_start_c");
        s.t_c_end = num("t_c_end_c");
        s.delta_tc = num("delta_tc_c");
        s.apparent_power_r = num("apparent_power_r_va");
        s.current_start = num("current_start_a");
        s.control1_time = optional_from(j, "control1_time_s");
        s.control2_time = optional_from(j, "control2_time_s");
        const json &d = j.at("decision");
        s.decision.tripped = d.at("tripped").get<bool>();
        s.decision.time = d.at("time_s").get<double>();
        s.decision.rule_fired =
            d.at("rule") == "control1" ? detector::Control::control1 : detector::Control::control2;
        s.decision.slope_values = slope_map_from(d.at("slopes"));
        s.reported_time = optional_from(j, "reported_time_s");
        const json &fs = j.at("final_slopes");
        for (auto it = fs.begin(); it != fs.end(); ++it) {
            const auto k = static_cast<std::size_t>(std::stoi(it.key()));
            if (k < s.final_slopes.value.size()) {
                s.final_slopes.valid[k] = true;
                s.final_slopes.value[k] = it.value().is_null() ? std::nan("") : it.value().get<double>();
            }
        }
        s.samples = j.at("samples").get<std::int64_t>();
        s.invalid_samples = j.at("invalid_samples").get<std::int64_t>();
        s.restarts = j.at("restarts").get<std::int64_t>();
    } catch (const json::exception &e) {
        throw ValidationError(std::string("run summary: ") + e.what());
    }
    return s;
}

namespace {

struct Panel {
    double top, height;
    double lo, hi;
};

std::string svg_num(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

std::string label_num(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

void range_of(const std::vector<double> &v, double &lo, double &hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (double x : v) {
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    if (!(lo <= hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        const double pad = std::max(1e-9, 1e-6 * std::abs(hi));
        lo -= pad;
        hi += pad;
    }
}

} // namespace

std::string trace_to_svg(const sim::RunTrace &trace, const std::string &title) {
    constexpr double width = 900.0, left = 80.0, right = 20.0, panel_h = 200.0, gap = 40.0, top0 = 40.0;
    const auto &recs = trace.records;
    const double t0 = recs.empty() ? 0.0 : recs.front().t;
    const double t1 = recs.empty() ? 1.0 : std::max(recs.back().t, t0 + 1e-9);
    const double plot_w = width - left - right;
    auto xpos = [&](double t) { return left + (t - t0) / (t1 - t0) * plot_w; };

    std::vector<double> td, ma, tc;
    for (const auto &r : recs) {
        td.push_back(r.tan_delta_valid ? r.tan_delta : std::nan(""));
        ma.push_back(r.ma_defined ? r.ma : std::nan(""));
        tc.push_back(r.t_c);
    }
    Panel p1{top0, panel_h, 0, 0}, p2{top0 + panel_h + gap, panel_h, 0, 0}, p3{top0 + 2 * (panel_h + gap), panel_h, 0, 0};
    range_of(td, p1.lo, p1.hi);
    range_of(ma, p2.lo, p2.hi);
    range_of(tc, p3.lo, p3.hi);
    const double height = p3.top + panel_h + 50.0;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) {
        os << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    }
    auto polyline = [&](const Panel &p, const std::vector<double> &v, const char *colour) {
        std::string pts;
        auto flush = [&] {
            if (!pts.empty()) {
                os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1\" points=\"" << pts
                   << "\"/>\n";
                pts.clear();
            }
        };
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i])) {
                flush();
                continue;
            }
            const double y = p.top + p.height - (v[i] - p.lo) / (p.hi - p.lo) * p.height;
            pts += svg_num(xpos(recs[i].t)) + "," + svg_num(y) + " ";
        }
        flush();
    };
    auto frame = [&](const Panel &p, const char *name) {
        os << "<rect x=\"" << left << "\" y=\"" << p.top << "\" width=\"" << plot_w << "\" height=\"" << p.height
           << "\" fill=\"none\" stroke=\"#888\"/>\n";
        os << "<text x=\"" << left << "\" y=\"" << p.top - 6 << "\">" << name << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << p.top + 10 << "\" text-anchor=\"end\">" << label_num(p.hi)
           << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << p.top + p.height << "\" text-anchor=\"end\">"
           << label_num(p.lo) << "</text>\n";
    };
    frame(p1, "tan delta (measured)");
    polyline(p1, td, "#7a7a7a");
    frame(p2, "moving average of tan delta");
    polyline(p2, ma, "#1f5fbf");
    frame(p3, "conductor temperature (degC)");
    polyline(p3, tc, "#c0392b");
    for (const auto &r : recs) {
        if (r.switched) {
            os << "<line x1=\"" << svg_num(xpos(r.t)) << "\" x2=\"" << svg_num(xpos(r.t)) << "\" y1=\"" << p1.top
               << "\" y2=\"" << p3.top + panel_h << "\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n";
        }
    }
    for (const auto &trip : trace.trips) {
        const double x = xpos(trip.time);
        const char *colour = trip.control == detector::Control::control1 ? "#d35400" : "#8e44ad";
        os << "<line x1=\"" << svg_num(x) << "\" x2=\"" << svg_num(x) << "\" y1=\"" << p1.top << "\" y2=\""
           << p3.top + panel_h << "\" stroke=\"" << colour << "\" stroke-dasharray=\"6,4\"/>\n";
        os << "<text x=\"" << svg_num(x + 4) << "\" y=\"" << p1.top + 14 << "\" fill=\"" << colour << "\">"
           << config::to_string(trip.control) << " trip " << label_num(trip.time) << " s</text>\n";
    }
    const double axis_y = p3.top + panel_h + 18;
    for (int i = 0; i <= 5; ++i) {
        const double t = t0 + (t1 - t0) * i / 5.0;
        os << "<text x=\"" << svg_num(xpos(t)) << "\" y=\"" << axis_y << "\" text-anchor=\"middle\">"
           << label_num(t) << "</text>\n";
    }
    os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << axis_y + 18 << "\" text-anchor=\"middle\">t (s)</text>\n";
    os << "</svg>\n";
    return os.str();
}

// ---- sweeps ----

void write_cells_header(std::ostream &out) {
    out << schema_line("firedetect.sweep_cells", 1) << "\n";
    out << "cell,seed";
    for (const auto &n : mc::dim_names()) {
        out << ',' << n << "_lo," << n << "_hi";
    }
    out << ",tests,discarded";
    for (const char *c : {"control1", "control2"}) {
        for (const char *m : {"tp", "tn", "fp", "fn"}) {
            out << ',' << c << '_' << m;
        }
    }
    out << '\n';
}

void write_cell_row(std::ostream &out, const mc::CellResult &cell) {
    std::string line = std::to_string(cell.cell.index) + "," + std::to_string(cell.cell.seed);
    for (const auto &b : cell.cell.bounds) {
        line += "," + format_double(b.lo) + "," + format_double(b.hi);
    }
    mc::ConfusionMatrix m1, m2;
    for (const auto &o : cell.outcomes) {
        m1.add(o, detector::Control::control1);
        m2.add(o, detector::Control::control2);
    }
    line += "," + std::to_string(cell.outcomes.size()) + "," + std::to_string(m1.discarded);
    for (const auto *m : {&m1, &m2}) {
        line += "," + std::to_string(m->tp) + "," + std::to_string(m->tn) + "," + std::to_string(m->fp) + "," +
                std::to_string(m->fn);
    }
    out << line << '\n';
}

void write_dataset_header(std::ostream &out) {
    out << schema_line("firedetect.dataset", 1) << "\n";
    out << "cell,test";
    for (const auto &n : mc::dim_names()) {
        out << ',' << n;
    }
    out << ",x_over_r,fire_distance,burn_time,loading,delta_tc,d3,d4,d6,d3_gt_1,d4_gt_1,d6_gt_1,"
           "control1,control2,cond_a,cond_b,cond_c,dtc_gt_2_87,label\n";
}

void write_dataset_rows(std::ostream &out, const mc::CellResult &cell, const mc::SweepConfig &cfg) {
    auto b = [](bool v) { return v ? "true" : "false"; };
    for (std::size_t i = 0; i < cell.outcomes.size(); ++i) {
        const mc::RunOutcome &o = cell.outcomes[i];
        if (o.discarded) {
            continue;
        }
        std::string line = std::to_string(cell.cell.index) + "," + std::to_string(i);
        for (double v : o.params.value) {
            line += "," + format_double(v);
        }
        line += "," + format_double(o.params.x_over_r);
        line += "," + format_double(o.params.fire_distance);
        line += "," + format_double(o.params.burn_time);
        line += "," + format_double(o.loading);
        line += "," + format_double(o.delta_tc);
        // undefined ratios are written as the neutral value 1
        double d[3];
        const int ks[3] = {3, 4, 6};
        for (int j = 0; j < 3; ++j) {
            d[j] = o.final_slopes.get(ks[j]).value_or(1.0);
            line += "," + format_double(d[j]);
        }
        for (int j = 0; j < 3; ++j) {
            line += std::string(",") + b(d[j] > 1.0);
        }
        line += std::string(",") + b(o.control1) + "," + b(o.control2);
        line += std::string(",") + b(o.flags & mc::flag_a) + "," + b(o.flags & mc::flag_b) + "," +
                b(o.flags & mc::flag_c);
        line += std::string(",") + b(o.delta_tc > cfg.delta_tc_filter) + "," + b(o.fire_present);
        out << line << '\n';
    }
}

namespace {

json matrix_json(const mc::ConfusionMatrix &m) {
    json j{{"tp", m.tp}, {"tn", m.tn}, {"fp", m.fp}, {"fn", m.fn}, {"discarded", m.discarded}};
    if (const auto r = m.rates()) {
        j["rates"] = {{"tp", (*r)[0]}, {"tn", (*r)[1]}, {"fp", (*r)[2]}, {"fn", (*r)[3]}};
    } else {
        j["rates"] = nullptr;
    }
    return j;
}

} // namespace

std::string sweep_summary_to_json(const mc::SweepResult &result, const mc::SweepConfig &cfg) {
    json j;
    j["schema"] = "firedetect.sweep_summary v1";
    j["config"] = {{"seed", cfg.seed},
                   {"subsample", cfg.subsample.to_string()},
                   {"tests_per_cell", cfg.tests_per_cell},
                   {"conductor", cfg.conductor},
                   {"duration_s", cfg.duration},
                   {"sample_rate_hz", cfg.sample_rate},
                   {"no_fire_probability", cfg.no_fire_probability},
                   {"delta_tc_interval", cfg.delta_tc_since_ignition ? "since_ignition" : "window"},
                   {"rating_current_a", cfg.rating_current()}};
    json grid = json::object();
    for (int d = 0; d < mc::kDims; ++d) {
        const auto &r = cfg.grid.dims[static_cast<std::size_t>(d)];
        grid[mc::dim_names()[static_cast<std::size_t>(d)]] = {{"lo", r.lo}, {"hi", r.hi}, {"intervals", r.intervals}};
    }
    j["config"]["grid"] = grid;
    j["cells"] = result.cells;
    j["runs"] = result.runs;
    j["discarded"] = result.discarded;
    j["results"] = json::array();
    const char *controls[2] = {"control1", "control2"};
    for (int c = 0; c < 2; ++c) {
        for (std::size_t f = 0; f < result.filter_names.size(); ++f) {
            json row = matrix_json(result.matrices[static_cast<std::size_t>(c)][f]);
            row["control"] = controls[c];
            row["filter"] = result.filter_names[f];
            j["results"].push_back(row);
        }
    }
    j["reference"] = json::array();
    for (const auto &r : mc::reference_rows()) {
        j["reference"].push_back(
            {{"control", r.control}, {"filter", r.filter}, {"tp_pct", r.tp}, {"tn_pct", r.tn}, {"fp_pct", r.fp}, {"fn_pct", r.fn}});
    }
    return j.dump(2) + "\n";
}

mc::SweepResult sweep_summary_from_json(const std::string &text) {
    const json j = parse_json(text);
    require_schema(j, "firedetect.sweep_summary v1");
    mc::SweepResult r;
    try {
        r.cells = j.at("cells").get<std::uint64_t>();
        r.runs = j.at("runs").get<std::uint64_t>();
        r.discarded = j.at("discarded").get<std::uint64_t>();
        for (const auto &row : j.at("results")) {
            const std::size_t c = row.at("control") == "control1" ? 0 : 1;
            const std::string filter = row.at("filter").get<std::string>();
            auto it = std::find(r.filter_names.begin(), r.filter_names.end(), filter);
            std::size_t f = 0;
            if (it == r.filter_names.end()) {
                r.filter_names.push_back(filter);
                r.matrices[0].emplace_back();
                r.matrices[1].emplace_back();
                f = r.filter_names.size() - 1;
            } else {
                f = static_cast<std::size_t>(it - r.filter_names.begin());
            }
            mc::ConfusionMatrix &m = r.matrices[c][f];
            m.tp = row.at("tp").get<std::uint64_t>();
            m.tn = row.at("tn").get<std::uint64_t>();
            m.fp = row.at("fp").get<std::uint64_t>();
            m.fn = row.at("fn").get<std::uint64_t>();
            m.discarded = row.at("discarded").get<std::uint64_t>();
        }
    } catch (const json::exception &e) {
        throw ValidationError(std::string("sweep summary: ") + e.what());
    }
    return r;
}

std::string sweep_report(const mc::SweepResult &result, const mc::SweepConfig &cfg) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "Sweep report\n\n";
    os << "subsample " << cfg.subsample.to_string() << ", " << result.cells << " cells x " << cfg.tests_per_cell
       << " tests, " << result.runs << " runs, " << result.discarded << " discarded (infeasible)\n\n";
    os << "| control | filter | runs | TP % | TN % | FP % | FN % |\n";
    os << "|---|---|---|---|---|---|---|\n";
    const char *controls[2] = {"control1", "control2"};
    for (int c = 0; c < 2; ++c) {
        for (std::size_t f = 0; f < result.filter_names.size(); ++f) {
            const auto &m = result.matrices[static_cast<std::size_t>(c)][f];
            os << "| " << controls[c] << " | " << result.filter_names[f] << " | " << m.total() << " | ";
            if (const auto r = m.rates()) {
                os << 100 * (*r)[0] << " | " << 100 * (*r)[1] << " | " << 100 * (*r)[2] << " | " << 100 * (*r)[3]
                   << " |\n";
            } else {
                os << "- | - | - | - |\n";
            }
        }
    }
    os << "\nPublished reference (full campaign, not reproducible at desk scale):\n\n";
    os << "| control | filter | TP % | TN % | FP % | FN % |\n";
    os << "|---|---|---|---|---|---|\n";
    for (const auto &r : mc::reference_rows()) {
        os << "| " << r.control << " | " << r.filter << " | " << r.tp << " | " << r.tn << " | " << r.fp << " | "
           << r.fn << " |\n";
    }
    return os.str();
}

// ---- rules ----

std::string rules_report(const dtree::Tree &tree, const std::vector<dtree::Rule> &rules, const std::string &label) {
    std::ostringstream os;
    os << "Rules for label '" << label << "'\n\n";
    os << tree_to_text(tree) << "\n";
    os << rules.size() << " rule(s) at or above the purity threshold:\n";
    for (const auto &r : rules) {
        os << "  " << r.to_string() << "  => " << (r.predicted ? "true" : "false") << "  purity "
           << std::setprecision(4) << r.purity << ", support " << r.support << "\n";
    }
    struct Published {
        const char *feature;
        double value;
        const char *context;
    };
    static const Published published[] = {
        {"delta_tc", 2.87, "conductor heating for reliable detection"},
        {"delta_ta", 76.0, "condition a"},
        {"delta_ta", 46.0, "condition c"},
        {"v_w", 1.35, "condition b"},
        {"t_s", 57.0, "condition c"},
        {"loading", 0.9, "condition b"},
        {"loading", 0.5, "condition c"},
        {"v_err", 3e-5, "control 2 voltage error"},
    };
    os << "\nMined thresholds next to published values (comparison only):\n";
    for (const auto &p : published) {
        os << "  " << p.feature << " (published " << p.value << ", " << p.context << "):";
        bool any = false;
        for (const auto &r : rules) {
            for (const auto &c : r.conditions) {
                if (c.feature == p.feature && (c.op == dtree::Comparator::le || c.op == dtree::Comparator::gt)) {
                    os << " " << (c.op == dtree::Comparator::le ? "<=" : ">") << " " << c.threshold;
                    any = true;
                }
            }
        }
        os << (any ? "" : " not used by any rule") << "\n";
    }
    return os.str();
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << content;
    if (!out) {
        throw IoError("write failed for '" + path + "'");
    }
}

} // namespace firedetect::io
