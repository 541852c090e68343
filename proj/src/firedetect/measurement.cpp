#include "firedetect/measurement.hpp"

#include "firedetect/errors.hpp"

#include <cmath>
#include <numbers>

namespace firedetect::measurement {

namespace {

double truncated_unit_normal(Rng &rng) {
    // sigma = half the envelope, rejected outside it
    for (;;) {
        const double x = 0.5 * rng.standard_normal();
        if (x >= -1.0 && x <= 1.0) {
            return x;
        }
    }
}

double unit_scalar(ErrorDistribution dist, Rng &rng) {
    return dist == ErrorDistribution::uniform ? rng.symmetric32() : truncated_unit_normal(rng);
}

Complex unit_disc(ErrorDistribution dist, Rng &rng) {
    if (dist == ErrorDistribution::uniform) {
        for (;;) {
            const Complex z{rng.symmetric32(), rng.symmetric32()};
            if (std::norm(z) <= 1.0) {
                return z;
            }
        }
    }
    for (;;) {
        const Complex z{0.5 * rng.standard_normal(), 0.5 * rng.standard_normal()};
        if (std::norm(z) <= 1.0) {
            return z;
        }
    }
}

ChannelDraw draw_channel(ErrorDistribution dist, Rng &rng) {
    ChannelDraw d;
    d.magnitude = unit_scalar(dist, rng);
    d.angle = unit_scalar(dist, rng);
    d.tve = unit_disc(dist, rng);
    return d;
}

} // namespace

void MeasurementModel::validate() const {
    if (!(v_mag_err_max >= 0.0 && i_mag_err_max_high >= 0.0 && i_mag_err_max_low >= 0.0 && tve_max >= 0.0 &&
          angle_err_max >= 0.0)) {
        throw ValidationError("measurement error bounds must be >= 0");
    }
    if (tve_max > 0.01) {
        throw ValidationError("measurement.tve_max must not exceed 0.01");
    }
    if (!(sample_rate > 0.0)) {
        throw ValidationError("measurement.sample_rate must be > 0");
    }
    if (!(nominal_current > 0.0)) {
        throw ValidationError("measurement.nominal_current must be > 0");
    }
}

double MeasurementModel::current_bound(double i_mag) const {
    return i_mag <= 0.2 * nominal_current ? i_mag_err_max_low : i_mag_err_max_high;
}

MeasurementModel MeasurementModel::ideal() {
    MeasurementModel m;
    m.v_mag_err_max = 0.0;
    m.i_mag_err_max_high = 0.0;
    m.i_mag_err_max_low = 0.0;
    m.tve_max = 0.0;
    m.angle_err_max = 0.0;
    return m;
}

ErrorDraw draw_errors(const MeasurementModel &model, Rng &rng) {
    ErrorDraw d;
    d.voltage = draw_channel(model.distribution, rng);
    d.current = draw_channel(model.distribution, rng);
    return d;
}

Phasor apply_channel(const Phasor &truth, const ChannelDraw &draw, double magnitude_bound, double angle_bound,
                     double tve_bound) noexcept {
    const Phasor scaled =
        Phasor::polar(truth.magnitude * (1.0 + draw.magnitude * magnitude_bound), truth.angle + draw.angle * angle_bound);
    const Complex tve = draw.tve * tve_bound;
    if (tve == Complex{0.0, 0.0}) {
        return scaled;
    }
    return Phasor::from_complex(scaled.to_complex() * (1.0 + tve));
}

Complex channel_factor(const ChannelDraw &draw, double magnitude_bound, double angle_bound, double tve_bound) noexcept {
    const double a = draw.angle * angle_bound;
    double c = 0.0;
    double sn = 0.0;
    if (std::abs(a) < 1e-3) {
        // series truncation error below a6/720, far under one ulp here
        const double a2 = a * a;
        c = 1.0 - a2 * (0.5 - a2 / 24.0);
        sn = a * (1.0 - a2 * (1.0 / 6.0 - a2 / 120.0));
    } else {
        c = std::cos(a);
        sn = std::sin(a);
    }
    const double m = 1.0 + draw.magnitude * magnitude_bound;
    const Complex tve = draw.tve * tve_bound;
    return Complex{m * c, m * sn} * Complex{1.0 + tve.real(), tve.imag()};
}

MeasurementSample apply_errors(const Phasor &true_v, const Phasor &true_i, const MeasurementModel &model,
                               const ErrorDraw &draw, double timestamp, Terminal terminal) {
    MeasurementSample s;
    s.timestamp = timestamp;
    s.terminal = terminal;
    s.v = apply_channel(true_v, draw.voltage, model.v_mag_err_max, model.angle_err_max, model.tve_max);
    s.i = apply_channel(true_i, draw.current, model.current_bound(true_i.magnitude), model.angle_err_max,
                        model.tve_max);
    return s;
}

MeasurementSample measure(const Phasor &true_v, const Phasor &true_i, const MeasurementModel &model, Rng &rng,
                          double timestamp, Terminal terminal) {
    return apply_errors(true_v, true_i, model, draw_errors(model, rng), timestamp, terminal);
}

double composite_error_bound(double magnitude_bound, double angle_bound, double tve_bound) noexcept {
    // |(1+e) e^{ja} (1+d) - 1| <= (1+|e|)(1+|d|)|a| + |e| + |d| + |e||d|
    return (1.0 + magnitude_bound) * (1.0 + tve_bound) * angle_bound + magnitude_bound + tve_bound +
           magnitude_bound * tve_bound;
}

Pmu::Pmu(const MeasurementModel &model, Terminal terminal, std::uint64_t seed)
    : model_(model), terminal_(terminal), rng_(seed) {
    if (model_.temporal == ErrorTemporal::static_per_run) {
        fixed_ = draw_errors(model_, rng_);
    }
}

std::pair<Complex, Complex> Pmu::sample_complex(Complex true_v, Complex true_i) {
    const ErrorDraw d = model_.temporal == ErrorTemporal::iid ? draw_errors(model_, rng_) : fixed_;
    const double i_mag = std::sqrt(std::norm(true_i));
    const Complex fv = channel_factor(d.voltage, model_.v_mag_err_max, model_.angle_err_max, model_.tve_max);
    const Complex fi = channel_factor(d.current, model_.current_bound(i_mag), model_.angle_err_max, model_.tve_max);
    return {true_v * fv, true_i * fi};
}

MeasurementSample Pmu::sample(const Phasor &true_v, const Phasor &true_i, double timestamp) {
    if (model_.temporal == ErrorTemporal::iid) {
        return apply_errors(true_v, true_i, model_, draw_errors(model_, rng_), timestamp, terminal_);
    }
    return apply_errors(true_v, true_i, model_, fixed_, timestamp, terminal_);
}

void TimingFault::validate(double duration) const {
    if (kind == TimingFaultKind::none) {
        return;
    }
    if (!(onset >= 0.0 && onset <= duration)) {
        throw ValidationError("timing_fault.onset_s must lie within the simulation window");
    }
    if (kind == TimingFaultKind::delay && !(delay > 0.0)) {
        throw ValidationError("timing_fault.delay_s must be > 0");
    }
}

StreamPair apply_timing_fault(StreamPair streams, const TimingFault &fault) {
    if (fault.kind == TimingFaultKind::none) {
        return streams;
    }
    if (streams.sending.size() != streams.receiving.size()) {
        throw ValidationError("measurement streams must have equal length");
    }
    auto &stream = fault.side == Terminal::sending ? streams.sending : streams.receiving;
    const std::size_t n = stream.size();
    if (n == 0) {
        return streams;
    }
    const double period = n > 1 ? stream[1].timestamp - stream[0].timestamp : 0.0;
    // half-sample slack absorbs timestamp rounding
    const double slack = 0.5 * period;
    std::size_t onset_index = n;
    for (std::size_t k = 0; k < n; ++k) {
        if (stream[k].timestamp >= fault.onset - slack) {
            onset_index = k;
            break;
        }
    }
    if (fault.kind == TimingFaultKind::frozen) {
        if (onset_index < n) {
            const MeasurementSample held = stream[onset_index];
            for (std::size_t k = onset_index; k < n; ++k) {
                stream[k].v = held.v;
                stream[k].i = held.i;
            }
        }
        return streams;
    }
    const std::size_t shift = period > 0.0 ? static_cast<std::size_t>(std::llround(fault.delay / period)) : 0;
    const std::vector<MeasurementSample> original = stream;
    for (std::size_t k = onset_index; k < n; ++k) {
        const MeasurementSample &src = k >= shift ? original[k - shift] : original.front();
        stream[k].v = src.v;
        stream[k].i = src.i;
    }
    return streams;
}

} // namespace firedetect::measurement
