#include "firedetect/montecarlo.hpp"

#include "firedetect/errors.hpp"
#include "firedetect/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace firedetect::mc {

const std::array<std::string, kDims> &dim_names() {
    static const std::array<std::string, kDims> names{"delta_ta", "t_a",           "v_w",   "t_s",  "length_km",
                                                      "current",  "pf_correction", "v_err", "i_err"};
    return names;
}

void ScenarioGrid::validate() const {
    static const std::array<Interval, kDims> limits{{
        {0.0, 225.5},
        {10.0, 40.0},
        {0.0, 6.5},
        {10.0, 100.0},
        {0.0, 20.0},
        {0.0, 1600.0},
        {0.0, 1.0},
        {0.0, 0.003},
        {0.0, 0.006},
    }};
    for (int d = 0; d < kDims; ++d) {
        const Range &r = dims[static_cast<std::size_t>(d)];
        const Interval &lim = limits[static_cast<std::size_t>(d)];
        const std::string &name = dim_names()[static_cast<std::size_t>(d)];
        if (r.intervals < 1) {
            throw ValidationError("grid." + name + ".intervals must be >= 1");
        }
        if (!(r.lo <= r.hi)) {
            throw ValidationError("grid." + name + ": lo must not exceed hi");
        }
        if (r.lo < lim.lo - 1e-12 || r.hi > lim.hi + 1e-12) {
            std::ostringstream err;
            err << "grid." << name << " outside the tested range [" << lim.lo << ", " << lim.hi << "]";
            throw ValidationError(err.str());
        }
    }
    if (dims[length_km].hi <= 0.0) {
        throw ValidationError("grid.length_km.hi must be > 0");
    }
}

std::uint64_t ScenarioGrid::cell_count() const {
    std::uint64_t n = 1;
    for (const auto &r : dims) {
        n *= static_cast<std::uint64_t>(r.intervals);
    }
    return n;
}

Interval ScenarioGrid::interval(int dim, int index) const {
    const Range &r = dims[static_cast<std::size_t>(dim)];
    const double w = (r.hi - r.lo) / r.intervals;
    const double lo = r.lo + w * index;
    const double hi = index + 1 == r.intervals ? r.hi : r.lo + w * (index + 1);
    return Interval{lo, hi};
}

Subsample Subsample::parse(const std::string &text) {
    if (text == "full") {
        return Subsample{SubsampleKind::full, 0};
    }
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string kind = text.substr(0, colon);
        const std::string count = text.substr(colon + 1);
        std::uint64_t n = 0;
        try {
            std::size_t used = 0;
            n = std::stoull(count, &used);
            if (used != count.size()) {
                throw std::invalid_argument(count);
            }
        } catch (const std::exception &) {
            throw ValidationError("subsample count must be a positive integer: '" + text + "'");
        }
        if (n == 0) {
            throw ValidationError("subsample count must be positive: '" + text + "'");
        }
        if (kind == "stratified") {
            return Subsample{SubsampleKind::stratified, n};
        }
        if (kind == "lhs") {
            return Subsample{SubsampleKind::lhs, n};
        }
    }
    throw ValidationError("subsample must be full, stratified:N or lhs:N, got '" + text + "'");
}

std::string Subsample::to_string() const {
    switch (kind) {
    case SubsampleKind::full:
        return "full";
    case SubsampleKind::stratified:
        return "stratified:" + std::to_string(n);
    case SubsampleKind::lhs:
        return "lhs:" + std::to_string(n);
    }
    return "full";
}

namespace {

std::vector<std::uint32_t> seeded_permutation(std::uint64_t n, std::uint64_t seed) {
    std::vector<std::uint32_t> p(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        p[i] = static_cast<std::uint32_t>(i);
    }
    // Fisher-Yates with our own draw so the order is the same on every stdlib
    Rng rng(seed);
    for (std::uint64_t i = n; i > 1; --i) {
        const std::uint64_t j = rng.below(i);
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

} // namespace

CellGenerator::CellGenerator(const ScenarioGrid &grid, Subsample subsample, std::uint64_t seed, int tests_per_cell)
    : grid_(grid), subsample_(subsample), seed_(seed), tests_per_cell_(tests_per_cell) {
    grid_.validate();
    if (tests_per_cell_ < 1) {
        throw ValidationError("tests_per_cell must be >= 1");
    }
    switch (subsample_.kind) {
    case SubsampleKind::full:
        count_ = grid_.cell_count();
        break;
    case SubsampleKind::stratified:
    case SubsampleKind::lhs:
        if (subsample_.n > 0xffffffffULL) {
            throw ValidationError("subsample count too large");
        }
        count_ = subsample_.n;
        for (int d = 0; d < kDims; ++d) {
            perm_[static_cast<std::size_t>(d)] =
                seeded_permutation(count_, derive_seed(seed_, 0x5eed0000ULL + static_cast<std::uint64_t>(d)));
        }
        break;
    }
}

ScenarioCell CellGenerator::cell(std::uint64_t i) const {
    if (i >= count_) {
        throw std::out_of_range("cell index out of range");
    }
    ScenarioCell c;
    c.index = i;
    c.tests_per_cell = tests_per_cell_;
    c.seed = derive_seed(seed_, i);
    switch (subsample_.kind) {
    case SubsampleKind::full: {
        // lexicographic, last dimension fastest
        std::uint64_t rest = i;
        for (int d = kDims - 1; d >= 0; --d) {
            const auto n = static_cast<std::uint64_t>(grid_.dims[static_cast<std::size_t>(d)].intervals);
            c.interval_index[static_cast<std::size_t>(d)] = static_cast<int>(rest % n);
            rest /= n;
        }
        break;
    }
    case SubsampleKind::stratified:
        // each dimension visits its intervals equally often, in a seeded order
        for (int d = 0; d < kDims; ++d) {
            const auto n = static_cast<std::uint32_t>(grid_.dims[static_cast<std::size_t>(d)].intervals);
            c.interval_index[static_cast<std::size_t>(d)] =
                static_cast<int>(perm_[static_cast<std::size_t>(d)][i] % n);
        }
        break;
    case SubsampleKind::lhs:
        for (int d = 0; d < kDims; ++d) {
            const Range &r = grid_.dims[static_cast<std::size_t>(d)];
            const double w = (r.hi - r.lo) / static_cast<double>(count_);
            const std::uint32_t s = perm_[static_cast<std::size_t>(d)][i];
            c.interval_index[static_cast<std::size_t>(d)] = -1;
            c.bounds[static_cast<std::size_t>(d)] =
                Interval{r.lo + w * s, s + 1 == count_ ? r.hi : r.lo + w * (s + 1)};
        }
        return c;
    }
    for (int d = 0; d < kDims; ++d) {
        c.bounds[static_cast<std::size_t>(d)] = grid_.interval(d, c.interval_index[static_cast<std::size_t>(d)]);
    }
    return c;
}

std::vector<ScenarioCell> generate_cells(const ScenarioGrid &grid, const Subsample &subsample, std::uint64_t seed,
                                         int tests_per_cell) {
    CellGenerator gen(grid, subsample, seed, tests_per_cell);
    std::vector<ScenarioCell> cells;
    cells.reserve(gen.size());
    for (std::uint64_t i = 0; i < gen.size(); ++i) {
        cells.push_back(gen.cell(i));
    }
    return cells;
}

void SweepConfig::validate() const {
    grid.validate();
    if (tests_per_cell < 1) {
        throw ValidationError("tests_per_cell must be >= 1");
    }
    catalogue.at(conductor);
    if (!(nominal_voltage_ll > 0.0)) {
        throw ValidationError("nominal_voltage_kv must be > 0");
    }
    if (!(power_factor > 0.0 && power_factor <= 1.0)) {
        throw ValidationError("power_factor must lie in (0, 1]");
    }
    if (!(x_over_r_min >= 0.13 && x_over_r_max <= 4.26 && x_over_r_min <= x_over_r_max)) {
        throw ValidationError("x_over_r range must lie within [0.13, 4.26]");
    }
    if (shunt_susceptance_per_km < 0.0) {
        throw ValidationError("shunt_susceptance_per_km must be >= 0");
    }
    if (!(fire_duration_min > 0.0 && fire_duration_min <= fire_duration_max)) {
        throw ValidationError("fire duration range must be positive and ordered");
    }
    if (!(no_fire_probability >= 0.0 && no_fire_probability <= 1.0)) {
        throw ValidationError("no_fire_probability must lie in [0, 1]");
    }
    if (!(i_err_high_ratio >= 0.0 && i_err_high_ratio <= 1.0)) {
        throw ValidationError("i_err_high_ratio must lie in [0, 1]");
    }
    measurement.validate();
    detector::DetectorConfig d = detector;
    d.sample_rate = sample_rate;
    d.validate();
    if (!(duration > 0.0 && sample_rate > 0.0)) {
        throw ValidationError("duration and sample_rate must be positive");
    }
}

double SweepConfig::phase_voltage() const { return nominal_voltage_ll / std::sqrt(3.0); }

double SweepConfig::rating_current() const {
    const thermal::Conductor &c = catalogue.at(conductor);
    return thermal::static_rating_current(catalogue.params_for(conductor), c.r20_per_m, c.alpha, catalogue.rating);
}

double SweepConfig::rating_va() const { return phase_voltage() * rating_current(); }

ScenarioParams draw_params(const ScenarioCell &cell, const SweepConfig &cfg, Rng &rng) {
    ScenarioParams p;
    for (int d = 0; d < kDims; ++d) {
        const Interval &iv = cell.bounds[static_cast<std::size_t>(d)];
        p.value[static_cast<std::size_t>(d)] = rng.uniform_upper(iv.lo, iv.hi);
    }
    p.x_over_r = cfg.x_over_r_min + rng.uniform01() * (cfg.x_over_r_max - cfg.x_over_r_min);
    const Interval &fire_iv = cell.bounds[delta_ta];
    const bool no_fire_interval = fire_iv.lo <= 0.0;
    const double u_fire = rng.uniform01();
    const double burn = rng.uniform_upper(cfg.fire_duration_min, cfg.fire_duration_max);
    if (fire_iv.hi <= 0.0 || (no_fire_interval && u_fire < cfg.no_fire_probability)) {
        p.value[delta_ta] = 0.0;
        p.fire = false;
        return p;
    }
    // Realize the ambient rise as a fire seat: pick a burn time, invert the
    // calibration for the distance, then refit the burn time to the clamped
    // distance so the rise at the window end is exact.
    const double target = p.value[delta_ta];
    const thermal::FireCalibration &cal = cfg.calibration;
    const double d = cal.distance_for_factor(target / std::pow(burn, cal.exponent));
    const double f = cal.factor(d);
    p.fire = true;
    p.fire_distance = d;
    p.burn_time = std::pow(target / f, 1.0 / cal.exponent);
    p.ignition_time = cfg.duration - p.burn_time;
    return p;
}

sim::RunSpec build_run_spec(const ScenarioParams &params, const SweepConfig &cfg, std::uint64_t seed) {
    const thermal::Conductor &cond = cfg.catalogue.at(cfg.conductor);
    sim::RunSpec spec;
    const double length = params.value[length_km];
    spec.segment.length_km = length;
    spec.segment.r_ref = cond.r20_per_m * length * 1000.0;
    spec.segment.x = params.x_over_r * spec.segment.r_ref;
    spec.segment.alpha = cond.alpha;
    spec.segment.t_ref = 20.0;
    spec.segment.b_shunt = cfg.shunt_susceptance_per_km * length;

    const double v = cfg.phase_voltage();
    const double s = v * params.value[current];
    const double sin_phi = std::sqrt(std::max(0.0, 1.0 - cfg.power_factor * cfg.power_factor));
    spec.operating.source_voltage = phasor::Phasor{v, 0.0};
    spec.operating.load_p = s * cfg.power_factor;
    spec.operating.load_q = s * sin_phi;
    spec.operating.shunt_compensation = params.value[pf_correction] * spec.operating.load_q / (v * v);

    spec.thermal = cfg.catalogue.params_for(cfg.conductor);
    spec.weather = thermal::Weather{params.value[v_w], params.value[t_a]};
    spec.initial_t_c = params.value[t_s];

    spec.fire.active = params.fire;
    spec.fire.distance = params.fire ? params.fire_distance : cfg.calibration.min_distance();
    spec.fire.ignition_time = params.ignition_time;
    spec.calibration = cfg.calibration;

    spec.measurement = cfg.measurement;
    spec.measurement.v_mag_err_max = params.value[v_err];
    spec.measurement.i_mag_err_max_low = params.value[i_err];
    spec.measurement.i_mag_err_max_high = params.value[i_err] * cfg.i_err_high_ratio;

    spec.detector = cfg.detector;
    spec.duration = cfg.duration;
    spec.sample_rate = cfg.sample_rate;
    spec.seed = seed;
    return spec;
}

unsigned label_conditions(const RunOutcome &outcome, const ScenarioParams &params) {
    if (!outcome.fire_present) {
        return 0;
    }
    unsigned flags = 0;
    const double dta = params.value[delta_ta];
    if (dta > 76.0) {
        flags |= flag_a;
    }
    if (params.value[v_w] < 1.35 && outcome.loading > 0.9) {
        flags |= flag_b;
    }
    if (params.value[t_s] < 57.0 && outcome.loading > 0.5 && dta > 46.0) {
        flags |= flag_c;
    }
    return flags;
}

RunOutcome run_test(const ScenarioCell &cell, int test_index, const SweepConfig &cfg) {
    const std::uint64_t test_seed = derive_seed(cell.seed, static_cast<std::uint64_t>(test_index));
    Rng rng(test_seed);
    RunOutcome out;
    out.params = draw_params(cell, cfg, rng);
    try {
        const sim::RunSpec spec = build_run_spec(out.params, cfg, derive_seed(test_seed, 0xa11ce));
        const sim::RunTrace trace = sim::run(spec, sim::RunOptions{false});
        const sim::RunSummary &s = trace.summary;
        out.discarded = s.discarded;
        out.fire_present = out.params.fire;
        out.control1 = s.control1_time.has_value();
        out.control2 = s.control2_time.has_value();
        out.control1_time = s.control1_time;
        out.control2_time = s.control2_time;
        out.delta_tc = cfg.delta_tc_since_ignition ? s.delta_tc : s.t_c_end - s.t_c_start;
        out.loading = s.apparent_power_r / cfg.rating_va();
        out.final_slopes = s.final_slopes;
    } catch (const InfeasibleError &) {
        out.discarded = true;
    } catch (const DomainError &) {
        out.discarded = true;
    }
    out.flags = out.discarded ? 0u : label_conditions(out, out.params);
    return out;
}

std::optional<std::array<double, 4>> ConfusionMatrix::rates() const {
    if (empty()) {
        return std::nullopt;
    }
    const double n = static_cast<double>(total());
    return std::array<double, 4>{tp / n, tn / n, fp / n, fn / n};
}

void ConfusionMatrix::add(const RunOutcome &o, detector::Control c) {
    if (o.discarded) {
        ++discarded;
        return;
    }
    const bool trip = o.tripped(c);
    if (o.fire_present) {
        ++(trip ? tp : fn);
    } else {
        ++(trip ? fp : tn);
    }
}

ConfusionMatrix &ConfusionMatrix::operator+=(const ConfusionMatrix &o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    discarded += o.discarded;
    return *this;
}

ConfusionMatrix aggregate(const std::vector<RunOutcome> &outcomes, const OutcomeFilter &filter,
                          detector::Control control) {
    ConfusionMatrix m;
    for (const auto &o : outcomes) {
        if (o.discarded) {
            ++m.discarded;
            continue;
        }
        if (!filter || filter(o)) {
            m.add(o, control);
        }
    }
    return m;
}

std::vector<NamedFilter> standard_filters(const SweepConfig &cfg) {
    const double dtc = cfg.delta_tc_filter;
    const double verr = cfg.v_err_filter;
    return {
        {"all", [](const RunOutcome &) { return true; }},
        {"dtc_gt_2.87", [dtc](const RunOutcome &o) { return o.delta_tc > dtc; }},
        {"dtc_gt_2.87_and_verr_lt_3e-5",
         [dtc, verr](const RunOutcome &o) { return o.delta_tc > dtc && o.params.value[v_err] < verr; }},
        {"cond_a", [](const RunOutcome &o) { return (o.flags & flag_a) != 0; }},
        {"cond_b", [](const RunOutcome &o) { return (o.flags & flag_b) != 0; }},
        {"cond_c", [](const RunOutcome &o) { return (o.flags & flag_c) != 0; }},
    };
}

SweepResult run_sweep(const SweepConfig &cfg, int workers, const SweepCallbacks &callbacks) {
    cfg.validate();
    if (workers < 1) {
        throw ValidationError("workers must be >= 1");
    }
    const CellGenerator gen(cfg.grid, cfg.subsample, cfg.seed, cfg.tests_per_cell);
    const auto filters = standard_filters(cfg);

    SweepResult result;
    result.cells = gen.size();
    for (const auto &f : filters) {
        result.filter_names.push_back(f.name);
    }
    for (auto &m : result.matrices) {
        m.assign(filters.size(), ConfusionMatrix{});
    }

    constexpr std::uint64_t kChunk = 512;
    std::vector<CellResult> chunk;
    for (std::uint64_t begin = 0; begin < gen.size(); begin += kChunk) {
        const std::uint64_t end = std::min(gen.size(), begin + kChunk);
        chunk.assign(end - begin, CellResult{});
        std::atomic<std::uint64_t> next{begin};
        auto work = [&] {
            for (;;) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= end) {
                    return;
                }
                CellResult &cr = chunk[i - begin];
                cr.cell = gen.cell(i);
                cr.outcomes.reserve(static_cast<std::size_t>(cfg.tests_per_cell));
                for (int t = 0; t < cfg.tests_per_cell; ++t) {
                    cr.outcomes.push_back(run_test(cr.cell, t, cfg));
                }
            }
        };
        const int n_threads = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), end - begin));
        if (n_threads <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(n_threads));
            for (int w = 0; w < n_threads; ++w) {
                pool.emplace_back(work);
            }
            for (auto &th : pool) {
                th.join();
            }
        }
        for (const CellResult &cr : chunk) {
            for (const RunOutcome &o : cr.outcomes) {
                ++result.runs;
                if (o.discarded) {
                    ++result.discarded;
                }
                for (std::size_t f = 0; f < filters.size(); ++f) {
                    if (o.discarded) {
                        ++result.matrices[0][f].discarded;
                        ++result.matrices[1][f].discarded;
                    } else if (filters[f].predicate(o)) {
                        result.matrices[0][f].add(o, detector::Control::control1);
                        result.matrices[1][f].add(o, detector::Control::control2);
                    }
                }
            }
            if (callbacks.on_cell) {
                callbacks.on_cell(cr);
            }
        }
        if (callbacks.on_progress) {
            callbacks.on_progress(end, gen.size());
        }
    }
    return result;
}

const std::vector<ReferenceRow> &reference_rows() {
    static const std::vector<ReferenceRow> rows{
        {"control1", "dtc_gt_2.87", 99.32, 0.29, 0.29, 0.10},
        {"control2", "dtc_gt_2.87_and_verr_lt_3e-5", 89.13, 0.00, 0.00, 10.87},
    };
    return rows;
}

} // namespace firedetect::mc
