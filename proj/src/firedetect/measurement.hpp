#pragma once

#include "firedetect/phasor.hpp"
#include "firedetect/rng.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace firedetect::measurement {

using phasor::Complex;
using phasor::Phasor;

enum class ErrorDistribution { uniform, truncated_gaussian };

// iid: a fresh error on every sample. static_per_run: each channel keeps the
// error drawn at start-up (instrument-transformer ratio / phase error).
enum class ErrorTemporal { iid, static_per_run };

struct MeasurementModel {
    double v_mag_err_max = 0.003;      // pu
    double i_mag_err_max_high = 0.003; // pu, I > 20% I_n
    double i_mag_err_max_low = 0.006;  // pu, I <= 20% I_n
    double tve_max = 0.01;
    double angle_err_max = 0.021 * 3.14159265358979323846 / 180.0; // rad
    double sample_rate = 5000.0;
    double nominal_current = 2100.0; // A
    ErrorDistribution distribution = ErrorDistribution::uniform;
    ErrorTemporal temporal = ErrorTemporal::iid;

    void validate() const;
    double current_bound(double i_mag) const;

    // All error bounds zero.
    static MeasurementModel ideal();
};

enum class Terminal { sending, receiving };

struct MeasurementSample {
    double timestamp = 0.0;
    Phasor v;
    Phasor i;
    Terminal terminal = Terminal::sending;
};

// Error draws normalised to the unit envelope: magnitude and angle in
// [-1, 1], tve inside the unit disc. They are scaled by the model bounds
// when applied, so a static draw follows the current-dependent bound.
struct ChannelDraw {
    double magnitude = 0.0;
    double angle = 0.0;
    Complex tve{0.0, 0.0};
};

struct ErrorDraw {
    ChannelDraw voltage;
    ChannelDraw current;
};

ErrorDraw draw_errors(const MeasurementModel &model, Rng &rng);

Phasor apply_channel(const Phasor &truth, const ChannelDraw &draw, double magnitude_bound, double angle_bound,
                     double tve_bound) noexcept;

// The same error as a complex factor: measured = truth * factor.
Complex channel_factor(const ChannelDraw &draw, double magnitude_bound, double angle_bound, double tve_bound) noexcept;

MeasurementSample apply_errors(const Phasor &true_v, const Phasor &true_i, const MeasurementModel &model,
                               const ErrorDraw &draw, double timestamp, Terminal terminal);

// Fresh per-sample draw from rng.
MeasurementSample measure(const Phasor &true_v, const Phasor &true_i, const MeasurementModel &model, Rng &rng,
                          double timestamp = 0.0, Terminal terminal = Terminal::sending);

// Worst-case |measured/true - 1| for a channel with the given bounds.
double composite_error_bound(double magnitude_bound, double angle_bound, double tve_bound) noexcept;

// One PMU with its instrument transformers. Owns its random stream.
class Pmu {
  public:
    Pmu(const MeasurementModel &model, Terminal terminal, std::uint64_t seed);

    MeasurementSample sample(const Phasor &true_v, const Phasor &true_i, double timestamp);
    // Rectangular-form variant for the simulation loop; returns (v, i).
    std::pair<Complex, Complex> sample_complex(Complex true_v, Complex true_i);

  private:
    MeasurementModel model_;
    Terminal terminal_;
    Rng rng_;
    ErrorDraw fixed_;
};

enum class TimingFaultKind { none, frozen, delay };

struct TimingFault {
    TimingFaultKind kind = TimingFaultKind::none;
    Terminal side = Terminal::sending;
    double onset = 0.0; // s
    double delay = 0.1; // s

    void validate(double duration) const;
};

struct StreamPair {
    std::vector<MeasurementSample> sending;
    std::vector<MeasurementSample> receiving;
};

// frozen: from the first sample at or after onset the faulted side keeps
// reporting that sample's values. delay: from onset the faulted side reports
// the values of t - delay, padded with the first sample. Timestamps are kept.
StreamPair apply_timing_fault(StreamPair streams, const TimingFault &fault);

} // namespace firedetect::measurement
