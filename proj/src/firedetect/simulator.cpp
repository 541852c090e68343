#include "firedetect/simulator.hpp"

#include "firedetect/errors.hpp"
#include "firedetect/rng.hpp"

#include <algorithm>
#include <cmath>

namespace firedetect::sim {

void RunSpec::validate() const {
    segment.validate();
    thermal.validate();
    if (!(weather.v_w >= 0.0 && weather.v_w <= 6.5)) {
        throw ValidationError("weather.v_w must lie in [0, 6.5] m/s");
    }
    if (fire.active) {
        fire.validate();
        if (fire.distance < calibration.min_distance() || fire.distance > calibration.max_distance()) {
            throw ValidationError("fire.distance_m outside the calibration grid");
        }
    }
    measurement.validate();
    if (!(duration > 0.0) || !(sample_rate > 0.0)) {
        throw ValidationError("duration and sample_rate must be positive");
    }
    timing_fault.validate(duration);
    detector::DetectorConfig cfg = detector;
    cfg.sample_rate = sample_rate;
    cfg.validate();
    if (sample_count() < cfg.warmup_samples()) {
        throw ValidationError("duration shorter than the detector warm-up");
    }
    if (preheat && !(preheat_step > 0.0)) {
        throw ValidationError("preheat_step must be > 0");
    }
    if (initial_t_c && (*initial_t_c < phasor::kMinConductorTemp || *initial_t_c > phasor::kMaxConductorTemp)) {
        throw ValidationError("initial_t_c outside [-40, 300] degC");
    }
    for (const auto &sw : switches) {
        if (sw.kind == CompensationKind::series && !(sw.value >= 0.0 && sw.value < segment.x)) {
            throw ValidationError("series compensation must lie in [0, x)");
        }
        if (sw.kind == CompensationKind::shunt && sw.value < 0.0) {
            throw ValidationError("shunt compensation must be >= 0");
        }
    }
}

std::int64_t RunSpec::sample_count() const { return static_cast<std::int64_t>(std::llround(duration * sample_rate)); }

double steady_state_temperature(const phasor::LineSegment &seg, const phasor::OperatingPoint &op,
                                const thermal::ConductorThermalParams &params, const thermal::Weather &weather) {
    double t_c = weather.t_a;
    for (int iter = 0; iter < 100; ++iter) {
        const auto ss = phasor::solve_steady_state(seg, op, t_c);
        const double next = thermal::equilibrium_temperature(params, seg, ss.i_series.magnitude, weather);
        if (next == t_c) {
            break;
        }
        t_c = next;
    }
    return t_c;
}

namespace {

struct Schedule {
    // index of the first sample at which each event applies
    std::vector<std::pair<std::int64_t, LoadStep>> loads;
    std::vector<std::pair<std::int64_t, CompensationSwitch>> switches;
};

std::int64_t event_index(double time, double fs) {
    return std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(time * fs - 0.5)));
}

Schedule build_schedule(const RunSpec &spec) {
    Schedule s;
    for (const auto &l : spec.load_steps) {
        s.loads.emplace_back(event_index(l.time, spec.sample_rate), l);
    }
    for (const auto &w : spec.switches) {
        s.switches.emplace_back(event_index(w.time, spec.sample_rate), w);
    }
    auto by_index = [](const auto &a, const auto &b) { return a.first < b.first; };
    std::stable_sort(s.loads.begin(), s.loads.end(), by_index);
    std::stable_sort(s.switches.begin(), s.switches.end(), by_index);
    return s;
}

TripEvent make_event(detector::Control c, double t, const detector::DetectorConfig &cfg,
                     const std::map<int, double> &slopes) {
    TripEvent e;
    e.control = c;
    e.time = t;
    e.reported_time = t + cfg.reporting_latency + cfg.communication_latency;
    e.slope_values = slopes;
    return e;
}

} // namespace

RunTrace run(const RunSpec &spec, const RunOptions &options) {
    spec.validate();
    RunTrace trace;
    RunSummary &sum = trace.summary;

    detector::DetectorConfig dcfg = spec.detector;
    dcfg.sample_rate = spec.sample_rate;
    measurement::MeasurementModel mmodel = spec.measurement;
    mmodel.sample_rate = spec.sample_rate;

    const std::int64_t n = spec.sample_count();
    const double dt = 1.0 / spec.sample_rate;
    const Schedule schedule = build_schedule(spec);

    phasor::LineSegment seg = spec.segment;
    phasor::OperatingPoint op = spec.operating;
    const double base_x = spec.segment.x;

    // events scheduled at t = 0 define the initial operating point
    std::size_t next_load = 0;
    std::size_t next_switch = 0;
    auto apply_events = [&](std::int64_t idx) {
        bool switched = false;
        while (next_load < schedule.loads.size() && schedule.loads[next_load].first <= idx) {
            op.load_p = schedule.loads[next_load].second.load_p;
            op.load_q = schedule.loads[next_load].second.load_q;
            ++next_load;
        }
        while (next_switch < schedule.switches.size() && schedule.switches[next_switch].first <= idx) {
            const auto &sw = schedule.switches[next_switch].second;
            if (sw.kind == CompensationKind::series) {
                seg.x = base_x - sw.value;
            } else {
                op.shunt_compensation = sw.value;
            }
            switched = true;
            ++next_switch;
        }
        return switched;
    };

    const bool two_pass = spec.timing_fault.kind != measurement::TimingFaultKind::none;
    std::vector<char> switch_flags;
    if (two_pass) {
        switch_flags.reserve(static_cast<std::size_t>(n));
    }
    if (options.keep_records) {
        trace.records.reserve(static_cast<std::size_t>(n));
    }

    measurement::Pmu pmu_s(mmodel, measurement::Terminal::sending, derive_seed(spec.seed, 1));
    measurement::Pmu pmu_r(mmodel, measurement::Terminal::receiving, derive_seed(spec.seed, 2));
    detector::Detector det(dcfg);

    using phasor::Complex;
    struct Measured {
        Complex v_s, i_s, v_r, i_r;
    };
    auto detect = [&](std::int64_t idx, const Measured &m, bool switched) {
        const double t = static_cast<double>(idx) * dt;
        if (switched) {
            det.switch_signal(t);
        }
        const auto td = detector::tan_delta_sample(m.v_s, m.v_r, m.i_r, dcfg.denominator_epsilon);
        const auto step = det.push(t, td);
        if (options.keep_records) {
            SampleRecord &r = trace.records[static_cast<std::size_t>(idx)];
            r.meas_v_s = Phasor::from_complex(m.v_s);
            r.meas_i_s = Phasor::from_complex(m.i_s);
            r.meas_v_r = Phasor::from_complex(m.v_r);
            r.meas_i_r = Phasor::from_complex(m.i_r);
            r.tan_delta = step.tan_delta.value;
            r.tan_delta_valid = step.tan_delta.valid;
            r.ma = step.ma.value;
            r.ma_defined = step.ma.defined;
            r.slopes = step.slopes;
            r.control1 = step.control1;
            r.control2 = step.control2;
            r.switched = switched;
        }
        return step;
    };

    std::vector<Measured> measured;
    if (two_pass) {
        measured.reserve(static_cast<std::size_t>(n));
    }

    thermal::ThermalState ts;
    double i_prev = 0.0;
    detector::DetectorStep last_step;
    std::int64_t done = 0;

    try {
        apply_events(0);
        const double t_c0 = spec.initial_t_c ? *spec.initial_t_c
                                             : steady_state_temperature(seg, op, spec.thermal, spec.weather);
        ts = thermal::ThermalState{t_c0, t_c0, spec.weather.t_a};
        sum.t_c_initial = t_c0;
        if (spec.preheat && spec.fire.active && spec.fire.ignition_time < 0.0) {
            const double span = -spec.fire.ignition_time;
            const auto steps = static_cast<std::int64_t>(std::ceil(span / spec.preheat_step));
            const double h = span / static_cast<double>(steps);
            for (std::int64_t k = 0; k < steps; ++k) {
                const double t = spec.fire.ignition_time + static_cast<double>(k) * h;
                thermal::Weather w = spec.weather;
                w.t_a = spec.weather.t_a + spec.fire.delta_ta(spec.calibration, t);
                const auto ss = phasor::solve_steady_state_complex(seg, op, ts.t_c);
                ts = thermal::step_conductor_temp(ts, spec.thermal, seg, std::sqrt(std::norm(ss.i_series)), w, h);
            }
        }
        sum.t_c_start = ts.t_c;

        for (std::int64_t idx = 0; idx < n; ++idx) {
            const double t = static_cast<double>(idx) * dt;
            const bool switched = idx > 0 && apply_events(idx);
            // (1) ambient at the conductor
            thermal::Weather w = spec.weather;
            w.t_a = spec.weather.t_a + spec.fire.delta_ta(spec.calibration, t);
            // (2) conductor temperature, driven by the previous sample's current
            if (idx > 0) {
                ts = thermal::step_conductor_temp(ts, spec.thermal, seg, i_prev, w, dt);
            } else {
                ts.t_a = w.t_a;
            }
            // (3)-(4) resistance and electrical solve
            const auto ss = phasor::solve_steady_state_complex(seg, op, ts.t_c);
            i_prev = std::sqrt(std::norm(ss.i_series));
            if (idx == 0) {
                const Complex s_r = ss.v_r * std::conj(ss.i_r);
                sum.apparent_power_r = std::sqrt(std::norm(s_r));
                sum.current_start = i_prev;
            }
            if (options.keep_records) {
                SampleRecord r;
                r.t = t;
                r.v_s = Phasor::from_complex(ss.v_s);
                r.v_r = Phasor::from_complex(ss.v_r);
                r.i_s = Phasor::from_complex(ss.i_s);
                r.i_r = Phasor::from_complex(ss.i_r);
                r.i_series = Phasor::from_complex(ss.i_series);
                const auto pr = phasor::receiving_power(r.v_r, r.i_r);
                r.p_r = pr.p_r;
                r.q_r = pr.q_r;
                r.t_c = ts.t_c;
                r.t_a = w.t_a;
                r.resistance = phasor::line_resistance(seg, ts.t_c);
                r.true_tan_delta = seg.x / r.resistance;
                trace.records.push_back(r);
            }
            // (5) measurement; the current channel sees the series branch
            const auto [mv_s, mi_s] = pmu_s.sample_complex(ss.v_s, ss.i_series);
            const auto [mv_r, mi_r] = pmu_r.sample_complex(ss.v_r, ss.i_series);
            const Measured m{mv_s, mi_s, mv_r, mi_r};
            if (two_pass) {
                measured.push_back(m);
                switch_flags.push_back(switched ? 1 : 0);
            } else {
                // (6)-(7) detector and controls
                last_step = detect(idx, m, switched);
            }
            sum.t_c_end = ts.t_c;
            sum.delta_ta_end = w.t_a - spec.weather.t_a;
            done = idx + 1;
        }
    } catch (const InfeasibleError &e) {
        sum.discarded = true;
        sum.discard_reason = e.what();
    } catch (const DomainError &e) {
        sum.discarded = true;
        sum.discard_reason = e.what();
    }

    if (two_pass && !sum.discarded) {
        measurement::StreamPair streams;
        streams.sending.reserve(measured.size());
        streams.receiving.reserve(measured.size());
        for (std::size_t u = 0; u < measured.size(); ++u) {
            const double t = static_cast<double>(u) * dt;
            streams.sending.push_back({t, Phasor::from_complex(measured[u].v_s),
                                       Phasor::from_complex(measured[u].i_s), measurement::Terminal::sending});
            streams.receiving.push_back({t, Phasor::from_complex(measured[u].v_r),
                                         Phasor::from_complex(measured[u].i_r), measurement::Terminal::receiving});
        }
        streams = measurement::apply_timing_fault(std::move(streams), spec.timing_fault);
        for (std::int64_t idx = 0; idx < done; ++idx) {
            const auto u = static_cast<std::size_t>(idx);
            const Measured m{streams.sending[u].v.to_complex(), streams.sending[u].i.to_complex(),
                             streams.receiving[u].v.to_complex(), streams.receiving[u].i.to_complex()};
            last_step = detect(idx, m, switch_flags[u] != 0);
        }
    }
    if (options.keep_records) {
        trace.records.resize(static_cast<std::size_t>(done));
    }

    sum.samples = done;
    sum.fire_present = spec.fire.active && sum.delta_ta_end > 0.0;
    sum.delta_tc = sum.t_c_end - sum.t_c_initial;
    if (sum.discarded) {
        return trace;
    }
    const auto &st = det.state();
    sum.control1_time = st.control1_tripped_at;
    sum.control2_time = st.control2_tripped_at;
    sum.decision = det.decision();
    if (sum.decision.tripped) {
        sum.reported_time = sum.decision.time + dcfg.reporting_latency + dcfg.communication_latency;
    }
    sum.final_slopes = last_step.slopes;
    sum.invalid_samples = st.invalid_samples;
    sum.restarts = st.restarts;

    if (st.control1_tripped_at) {
        trace.trips.push_back(make_event(detector::Control::control1, *st.control1_tripped_at, dcfg,
                                         det.slopes_at_trip(detector::Control::control1)));
    }
    if (st.control2_tripped_at) {
        trace.trips.push_back(make_event(detector::Control::control2, *st.control2_tripped_at, dcfg,
                                         det.slopes_at_trip(detector::Control::control2)));
    }
    return trace;
}

} // namespace firedetect::sim
