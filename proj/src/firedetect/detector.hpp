#pragma once

#include "firedetect/phasor.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace firedetect::detector {

using phasor::Phasor;

enum class Control { control1, control2 };

// What clears the slope history after a compensation switch.
//   signal   - the switching-status input from the compensation breaker
//   observed - a jump between consecutive valid tan delta samples
enum class RestartTrigger { signal, observed, both };

// fixed_window: delta(k) = ma(t - kT) / ma(t - T), ma over a fixed window.
// k_window: numerator is the mean over the k cycles ending at t - T, the
// denominator the one-window average ending at t - T.
enum class LagMode { fixed_window, k_window };

inline constexpr int kMinLag = 2;
inline constexpr int kMaxLag = 12;

struct DetectorConfig {
    double cycle_period = 1.0 / 60.0; // s
    int ma_window_cycles = 1;
    std::vector<int> k_set{3, 4, 6};
    Control control = Control::control1;
    double step_change_threshold = 0.05;
    RestartTrigger restart_trigger = RestartTrigger::signal;
    LagMode lag_mode = LagMode::fixed_window;
    double denominator_epsilon = 1e-12;
    double ratio_epsilon = 1e-12;
    double sample_rate = 5000.0;
    double reporting_latency = 0.2;      // s
    double communication_latency = 0.035; // s

    void validate() const;

    int window_samples() const;
    int lag_samples(int k) const;
    int max_k() const;
    bool has_k(int k) const;
    // samples from (re)start until the first control evaluation
    int warmup_samples() const;
    // data span behind a decision plus reporting and communication latency
    double latency_budget() const;
};

// tan delta from two-terminal phasors via the receiving-end power balance.
// Returns nullopt when the denominator vanishes (near purely reactive reading)
// or a terminal quantity is zero.
std::optional<double> tan_delta_sample(const Phasor &v_s, const Phasor &v_r, const Phasor &i_r,
                                       double denominator_epsilon = 1e-12);
std::optional<double> tan_delta_sample(phasor::Complex v_s, phasor::Complex v_r, phasor::Complex i_r,
                                       double denominator_epsilon = 1e-12);

// Fixed-capacity history stored twice so any window is contiguous.
template <typename T> class RingBuffer {
  public:
    explicit RingBuffer(std::size_t capacity = 1)
        : cap_(capacity == 0 ? 1 : capacity), data_(2 * cap_) {}

    void push(const T &v) {
        data_[head_] = v;
        data_[head_ + cap_] = v;
        head_ = head_ + 1 == cap_ ? 0 : head_ + 1;
        if (size_ < cap_) {
            ++size_;
        }
    }
    // back(0) is the newest element
    const T &back(std::size_t age) const { return data_[head_ + cap_ - 1 - age]; }
    // elements aged [age, age + len), oldest first
    const T *window(std::size_t age, std::size_t len) const { return &data_[head_ + cap_ - age - len]; }
    std::size_t size() const noexcept { return size_; }
    std::size_t capacity() const noexcept { return cap_; }
    void clear() noexcept {
        size_ = 0;
        head_ = 0;
    }

  private:
    std::size_t cap_;
    std::vector<T> data_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
};

struct TanDeltaPoint {
    double t = 0.0;
    double value = 0.0; // held previous valid value when invalid
    bool valid = false;
};

struct MaPoint {
    double t = 0.0;
    double value = 0.0;
    bool defined = false;
};

// Build with make_state(); the cached sample counts come from the config.
struct DetectorState {
    int window = 0;
    int warmup = 0;
    std::array<int, kMaxLag + 1> lags{};
    RingBuffer<TanDeltaPoint> tan_delta_series;
    RingBuffer<MaPoint> ma_series;
    RingBuffer<double> masked_values;        // value when valid, else 0
    RingBuffer<std::int64_t> valid_counts;   // valid samples since restart, cumulative
    std::int64_t samples_since_restart = 0;
    double armed_since = 0.0;
    std::optional<double> last_valid;
    std::optional<double> tripped_at;          // configured control
    std::optional<double> control1_tripped_at;
    std::optional<double> control2_tripped_at;
    std::int64_t invalid_samples = 0;
    std::int64_t invalid_ratios = 0;
    std::int64_t restarts = 0;
};

DetectorState make_state(const DetectorConfig &cfg);

struct TanDeltaInput {
    double t = 0.0;
    std::optional<double> value;
};

// Appends a sample and the moving average ending at it. Invalid samples are
// stored as the held previous value but excluded from the mean.
void update_moving_average(DetectorState &state, const DetectorConfig &cfg, const TanDeltaInput &sample);

// delta(k) at the newest sample; nullopt while either average is undefined
// or the recent average is <= ratio_epsilon.
std::optional<double> slope_ratio(const DetectorState &state, const DetectorConfig &cfg, int k);

struct SlopeValues {
    std::array<double, kMaxLag + 1> value{};
    std::array<bool, kMaxLag + 1> valid{};

    std::optional<double> get(int k) const {
        return valid[static_cast<std::size_t>(k)] ? std::optional<double>(value[static_cast<std::size_t>(k)])
                                                  : std::nullopt;
    }
};

SlopeValues compute_slopes(const DetectorState &state, const DetectorConfig &cfg);

bool control1_condition(const SlopeValues &s);
bool control2_condition(const SlopeValues &s);

struct TripDecision {
    bool tripped = false;
    double time = 0.0;
    Control rule_fired = Control::control1;
    std::map<int, double> slope_values;
};

// Evaluates both rules at the newest sample, latches first trips and
// reports the configured control.
TripDecision evaluate_controls(DetectorState &state, const DetectorConfig &cfg, const SlopeValues &slopes);
TripDecision evaluate_controls(DetectorState &state, const DetectorConfig &cfg);

// Restart after a compensation switch: slope history is cleared and the
// ratios rebuild from post-switch samples only. Latched trips stay.
void handle_compensation_switch(DetectorState &state, const DetectorConfig &cfg, double t);

// True when the jump from the previous valid sample exceeds the threshold.
bool step_observed(const DetectorState &state, const DetectorConfig &cfg, double value);

struct DetectorStep {
    TanDeltaPoint tan_delta;
    MaPoint ma;
    SlopeValues slopes;
    bool control1 = false; // rule condition held at this sample
    bool control2 = false;
    bool restarted = false;
};

// Streaming front end used by the simulator.
class Detector {
  public:
    explicit Detector(DetectorConfig cfg);

    // Call before push() for the sample at which the compensation switched.
    void switch_signal(double t);
    DetectorStep push(double t, std::optional<double> tan_delta);
    TripDecision decision() const;
    // slope ratios at the first sample where the rule held; empty if it never did
    std::map<int, double> slopes_at_trip(Control c) const;

    const DetectorConfig &config() const noexcept { return cfg_; }
    const DetectorState &state() const noexcept { return state_; }

  private:
    DetectorConfig cfg_;
    DetectorState state_;
    SlopeValues control1_slopes_;
    SlopeValues control2_slopes_;
};

} // namespace firedetect::detector
