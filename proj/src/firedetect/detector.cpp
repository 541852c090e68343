#include "firedetect/detector.hpp"

#include "firedetect/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace firedetect::detector {

void DetectorConfig::validate() const {
    if (!(cycle_period > 0.0) || !std::isfinite(cycle_period)) {
        throw ValidationError("detector.cycle_period must be positive");
    }
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
        throw ValidationError("detector.sample_rate must be positive");
    }
    if (ma_window_cycles < 1) {
        throw ValidationError("detector.ma_window_cycles must be >= 1");
    }
    if (k_set.empty()) {
        throw ValidationError("detector.k_set must not be empty");
    }
    for (int k : k_set) {
        if (k < kMinLag || k > kMaxLag) {
            throw ValidationError("detector.k_set entry " + std::to_string(k) + " outside [2, 12]");
        }
    }
    if (!has_k(6)) {
        throw ValidationError("detector.k_set must contain 6");
    }
    if (control == Control::control1 && !(has_k(3) && has_k(4))) {
        throw ValidationError("detector.k_set must contain 3 and 4 for control1");
    }
    if (!(step_change_threshold > 0.0)) {
        throw ValidationError("detector.step_change_threshold must be positive");
    }
    if (!(denominator_epsilon >= 0.0) || !(ratio_epsilon >= 0.0)) {
        throw ValidationError("detector epsilons must be non-negative");
    }
    if (reporting_latency < 0.0 || reporting_latency > 0.2) {
        throw ValidationError("detector.reporting_latency must be in [0, 0.2] s");
    }
    if (communication_latency < 0.0 || communication_latency > 0.035) {
        throw ValidationError("detector.communication_latency must be in [0, 0.035] s");
    }
    if (lag_samples(1) < 1) {
        throw ValidationError("detector: sample rate too low for one sample per cycle");
    }
}

int DetectorConfig::window_samples() const {
    // closed interval [t - window, t]
    double w = ma_window_cycles * cycle_period * sample_rate;
    return static_cast<int>(std::floor(w + 1e-9)) + 1;
}

int DetectorConfig::lag_samples(int k) const {
    return static_cast<int>(std::llround(k * cycle_period * sample_rate));
}

int DetectorConfig::max_k() const { return *std::max_element(k_set.begin(), k_set.end()); }

bool DetectorConfig::has_k(int k) const { return std::find(k_set.begin(), k_set.end(), k) != k_set.end(); }

int DetectorConfig::warmup_samples() const {
    int mk = max_k();
    if (lag_mode == LagMode::k_window) {
        return lag_samples(1) + std::max(lag_samples(mk), window_samples());
    }
    return lag_samples(mk) + window_samples();
}

double DetectorConfig::latency_budget() const {
    return max_k() * cycle_period + ma_window_cycles * cycle_period + reporting_latency + communication_latency;
}

std::optional<double> tan_delta_sample(const Phasor &v_s, const Phasor &v_r, const Phasor &i_r,
                                       double denominator_epsilon) {
    if (!(v_s.magnitude > 0.0) || !(v_r.magnitude > 0.0) || !(i_r.magnitude > 0.0)) {
        return std::nullopt;
    }
    return tan_delta_sample(v_s.to_complex(), v_r.to_complex(), i_r.to_complex(), denominator_epsilon);
}

std::optional<double> tan_delta_sample(phasor::Complex v_s, phasor::Complex v_r, phasor::Complex i_r,
                                       double denominator_epsilon) {
    using phasor::Complex;
    const double vs_mag = std::sqrt(std::norm(v_s));
    const double vr_mag = std::sqrt(std::norm(v_r));
    const double i_mag = std::sqrt(std::norm(i_r));
    if (!(vs_mag > 0.0) || !(vr_mag > 0.0) || !(i_mag > 0.0)) {
        return std::nullopt;
    }
    // Normalize so the epsilon means the same thing at any voltage level.
    const double vb = std::max(vs_mag, vr_mag);
    const Complex vr = v_r / vb;
    const Complex ir = i_r / i_mag;
    // P_R + jQ_R, and V_S rotated into the frame of V_R (angle theta)
    const Complex s_r = vr * std::conj(ir);
    const Complex w = v_s * std::conj(v_r) / (vb * vr_mag);
    // den + j num = (P_R + jQ_R)(V_S e^{j theta} - V_R)
    const Complex z = s_r * (w - vr_mag / vb);
    const double num = z.imag();
    const double den = z.real();
    if (!(std::abs(den) > denominator_epsilon) || !std::isfinite(num)) {
        return std::nullopt;
    }
    return num / den;
}

namespace {

std::size_t history_capacity(const DetectorConfig &cfg) {
    const std::size_t w = static_cast<std::size_t>(cfg.window_samples());
    const std::size_t lag = static_cast<std::size_t>(cfg.lag_samples(cfg.max_k()));
    return lag + w + 1;
}

// Mean of valid tan delta samples aged [age, age + len). nullopt if the range
// reaches before the restart or holds no valid sample.
std::optional<double> mean_range(const DetectorState &s, std::size_t age, std::size_t len) {
    if (age + len > s.tan_delta_series.size() ||
        static_cast<std::int64_t>(age + len) > s.samples_since_restart) {
        return std::nullopt;
    }
    const double *v = s.masked_values.window(age, len);
    // four partial sums; a window of equal values still gives equal means
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        acc[0] += v[i];
        acc[1] += v[i + 1];
        acc[2] += v[i + 2];
        acc[3] += v[i + 3];
    }
    for (; i < len; ++i) {
        acc[0] += v[i];
    }
    const double sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    const std::int64_t before =
        static_cast<std::int64_t>(age + len) < s.samples_since_restart ? s.valid_counts.back(age + len) : 0;
    const std::int64_t n = s.valid_counts.back(age) - before;
    if (n == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(n);
}

std::optional<double> ma_at_age(const DetectorState &s, std::size_t age) {
    if (age >= s.ma_series.size()) {
        return std::nullopt;
    }
    const auto &m = s.ma_series.back(age);
    return m.defined ? std::optional<double>(m.value) : std::nullopt;
}

} // namespace

DetectorState make_state(const DetectorConfig &cfg) {
    cfg.validate();
    DetectorState s;
    s.window = cfg.window_samples();
    s.warmup = cfg.warmup_samples();
    for (int k = 1; k <= kMaxLag; ++k) {
        s.lags[static_cast<std::size_t>(k)] = cfg.lag_samples(k);
    }
    const std::size_t cap = history_capacity(cfg);
    s.tan_delta_series = RingBuffer<TanDeltaPoint>(cap);
    s.masked_values = RingBuffer<double>(cap);
    s.valid_counts = RingBuffer<std::int64_t>(cap + 1);
    s.ma_series = RingBuffer<MaPoint>(static_cast<std::size_t>(cfg.lag_samples(cfg.max_k())) + 1);
    return s;
}

void update_moving_average(DetectorState &state, const DetectorConfig &cfg, const TanDeltaInput &sample) {
    TanDeltaPoint p;
    p.t = sample.t;
    if (sample.value && std::isfinite(*sample.value)) {
        p.value = *sample.value;
        p.valid = true;
        state.last_valid = p.value;
    } else {
        p.value = state.last_valid.value_or(0.0);
        p.valid = false;
        ++state.invalid_samples;
    }
    state.tan_delta_series.push(p);
    state.masked_values.push(p.valid ? p.value : 0.0);
    const std::int64_t prev_count = state.samples_since_restart > 0 ? state.valid_counts.back(0) : 0;
    state.valid_counts.push(prev_count + (p.valid ? 1 : 0));
    ++state.samples_since_restart;

    MaPoint m;
    m.t = sample.t;
    (void)cfg;
    if (auto v = mean_range(state, 0, static_cast<std::size_t>(state.window))) {
        m.value = *v;
        m.defined = true;
    }
    state.ma_series.push(m);
}

std::optional<double> slope_ratio(const DetectorState &state, const DetectorConfig &cfg, int k) {
    if (k < 1 || k > kMaxLag) {
        return std::nullopt;
    }
    const std::size_t lag1 = static_cast<std::size_t>(state.lags[1]);
    const std::optional<double> recent = ma_at_age(state, lag1);
    std::optional<double> older;
    if (cfg.lag_mode == LagMode::fixed_window) {
        older = ma_at_age(state, static_cast<std::size_t>(state.lags[static_cast<std::size_t>(k)]));
    } else {
        older = mean_range(state, lag1, static_cast<std::size_t>(state.lags[static_cast<std::size_t>(k)]));
    }
    if (!recent || !older) {
        return std::nullopt;
    }
    if (!(*recent > cfg.ratio_epsilon)) {
        return std::nullopt;
    }
    return *older / *recent;
}

SlopeValues compute_slopes(const DetectorState &state, const DetectorConfig &cfg) {
    SlopeValues out;
    for (int k : cfg.k_set) {
        if (auto r = slope_ratio(state, cfg, k)) {
            out.value[static_cast<std::size_t>(k)] = *r;
            out.valid[static_cast<std::size_t>(k)] = true;
        }
    }
    return out;
}

bool control1_condition(const SlopeValues &s) {
    if (!s.valid[6] || !s.valid[4] || !s.valid[3]) {
        return false;
    }
    return s.value[6] > 1.0 && (s.value[4] > 1.0 || s.value[3] > 1.0);
}

bool control2_condition(const SlopeValues &s) { return s.valid[6] && s.value[6] > 1.0; }

namespace {

TripDecision make_decision(const DetectorState &state, const DetectorConfig &cfg, const SlopeValues &slopes) {
    TripDecision d;
    d.rule_fired = cfg.control;
    if (state.tripped_at) {
        d.tripped = true;
        d.time = *state.tripped_at;
        for (int k : cfg.k_set) {
            if (auto v = slopes.get(k)) {
                d.slope_values[k] = *v;
            }
        }
    }
    return d;
}

} // namespace

namespace {

// Latches first trips at the newest sample.
void latch_controls(DetectorState &state, const DetectorConfig &cfg, const SlopeValues &slopes) {
    if (state.tan_delta_series.size() == 0) {
        return;
    }
    for (int k : cfg.k_set) {
        if (!slopes.valid[static_cast<std::size_t>(k)]) {
            if (state.samples_since_restart >= state.warmup) {
                ++state.invalid_ratios;
            }
            return;
        }
    }
    const double t = state.tan_delta_series.back(0).t;
    const bool c1 = control1_condition(slopes);
    const bool c2 = control2_condition(slopes);
    if (c1 && !state.control1_tripped_at) {
        state.control1_tripped_at = t;
    }
    if (c2 && !state.control2_tripped_at) {
        state.control2_tripped_at = t;
    }
    const bool fired = cfg.control == Control::control1 ? c1 : c2;
    if (fired && !state.tripped_at) {
        state.tripped_at = t;
    }
}

} // namespace

TripDecision evaluate_controls(DetectorState &state, const DetectorConfig &cfg, const SlopeValues &slopes) {
    latch_controls(state, cfg, slopes);
    return make_decision(state, cfg, slopes);
}

TripDecision evaluate_controls(DetectorState &state, const DetectorConfig &cfg) {
    return evaluate_controls(state, cfg, compute_slopes(state, cfg));
}

void handle_compensation_switch(DetectorState &state, const DetectorConfig &cfg, double t) {
    (void)cfg;
    state.tan_delta_series.clear();
    state.ma_series.clear();
    state.masked_values.clear();
    state.valid_counts.clear();
    state.samples_since_restart = 0;
    state.armed_since = t;
    state.last_valid.reset();
    ++state.restarts;
}

bool step_observed(const DetectorState &state, const DetectorConfig &cfg, double value) {
    if (!state.last_valid || state.samples_since_restart == 0) {
        return false;
    }
    const double prev = *state.last_valid;
    if (prev == 0.0) {
        return value != 0.0;
    }
    return std::abs(value - prev) / std::abs(prev) > cfg.step_change_threshold;
}

Detector::Detector(DetectorConfig cfg) : cfg_(std::move(cfg)), state_(make_state(cfg_)) {}

void Detector::switch_signal(double t) {
    if (cfg_.restart_trigger != RestartTrigger::observed) {
        handle_compensation_switch(state_, cfg_, t);
    }
}

DetectorStep Detector::push(double t, std::optional<double> tan_delta) {
    DetectorStep step;
    if (cfg_.restart_trigger != RestartTrigger::signal && tan_delta && step_observed(state_, cfg_, *tan_delta)) {
        handle_compensation_switch(state_, cfg_, t);
        step.restarted = true;
    }
    update_moving_average(state_, cfg_, TanDeltaInput{t, tan_delta});
    step.tan_delta = state_.tan_delta_series.back(0);
    step.ma = state_.ma_series.back(0);
    step.slopes = compute_slopes(state_, cfg_);
    const bool had1 = state_.control1_tripped_at.has_value();
    const bool had2 = state_.control2_tripped_at.has_value();
    latch_controls(state_, cfg_, step.slopes);
    if (!had1 && state_.control1_tripped_at) {
        control1_slopes_ = step.slopes;
    }
    if (!had2 && state_.control2_tripped_at) {
        control2_slopes_ = step.slopes;
    }
    step.control1 = control1_condition(step.slopes);
    step.control2 = control2_condition(step.slopes);
    return step;
}

TripDecision Detector::decision() const {
    TripDecision d;
    d.rule_fired = cfg_.control;
    if (state_.tripped_at) {
        d.tripped = true;
        d.time = *state_.tripped_at;
        d.slope_values = slopes_at_trip(cfg_.control);
    }
    return d;
}

std::map<int, double> Detector::slopes_at_trip(Control c) const {
    const SlopeValues &s = c == Control::control1 ? control1_slopes_ : control2_slopes_;
    std::map<int, double> out;
    for (int k : cfg_.k_set) {
        if (auto v = s.get(k)) {
            out[k] = *v;
        }
    }
    return out;
}

} // namespace firedetect::detector
