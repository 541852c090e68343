#pragma once

#include "firedetect/detector.hpp"
#include "firedetect/measurement.hpp"
#include "firedetect/simulator.hpp"
#include "firedetect/thermal.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace firedetect::mc {

enum Dim : int { delta_ta, t_a, v_w, t_s, length_km, current, pf_correction, v_err, i_err };
inline constexpr int kDims = 9;

const std::array<std::string, kDims> &dim_names();

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    int intervals = 1;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct ScenarioGrid {
    std::array<Range, kDims> dims{{
        {0.0, 225.5, 5},  // ambient rise at the conductor, degC
        {10.0, 40.0, 5},  // ambient, degC
        {0.0, 6.5, 5},    // wind, m/s
        {10.0, 100.0, 5}, // conductor surface temperature at t = 0, degC
        {0.0, 20.0, 5},   // km
        {0.0, 1600.0, 5}, // A
        {0.0, 1.0, 5},    // share of the load vars compensated at the load bus
        {0.0, 0.003, 5},  // pu
        {0.0, 0.006, 5},  // pu, current error below 20% of nominal
    }};

    void validate() const;
    std::uint64_t cell_count() const;
    Interval interval(int dim, int index) const;
};

enum class SubsampleKind { full, stratified, lhs };

struct Subsample {
    SubsampleKind kind = SubsampleKind::full;
    std::uint64_t n = 0;

    // "full", "stratified:N", "lhs:N"
    static Subsample parse(const std::string &text);
    std::string to_string() const;
};

struct ScenarioCell {
    std::uint64_t index = 0;
    std::array<int, kDims> interval_index{}; // -1 for Latin-hypercube strata
    std::array<Interval, kDims> bounds{};
    int tests_per_cell = 1;
    std::uint64_t seed = 0;
};

// Deterministic cell stream; cells are produced by index so a full
// enumeration never needs to be materialized.
class CellGenerator {
  public:
    CellGenerator(const ScenarioGrid &grid, Subsample subsample, std::uint64_t seed, int tests_per_cell);

    std::uint64_t size() const noexcept { return count_; }
    ScenarioCell cell(std::uint64_t i) const;

  private:
    ScenarioGrid grid_;
    Subsample subsample_;
    std::uint64_t seed_;
    int tests_per_cell_;
    std::uint64_t count_ = 0;
    std::array<std::vector<std::uint32_t>, kDims> perm_; // stratified / lhs
};

std::vector<ScenarioCell> generate_cells(const ScenarioGrid &grid, const Subsample &subsample, std::uint64_t seed,
                                         int tests_per_cell);

struct SweepConfig {
    ScenarioGrid grid;
    Subsample subsample{SubsampleKind::stratified, 19683};
    int tests_per_cell = 10;
    std::uint64_t seed = 1;
    std::string conductor = "bluebird";
    thermal::ConductorCatalogue catalogue = thermal::default_catalogue();
    thermal::FireCalibration calibration = thermal::default_calibration();
    double nominal_voltage_ll = 138e3; // V
    double power_factor = 0.85;        // lagging, before compensation
    double x_over_r_min = 0.13;
    double x_over_r_max = 4.26;
    double shunt_susceptance_per_km = 0.0; // S/km
    double fire_duration_min = 10.0;       // s, burn time drawn before inversion to a distance
    double fire_duration_max = 60.0;
    double no_fire_probability = 0.5;      // in the interval starting at zero ambient rise
    double i_err_high_ratio = 0.5;         // bound above 20% I_n relative to i_err
    measurement::MeasurementModel measurement; // distribution, temporal mode, tve, angle, I_n
    detector::DetectorConfig detector;
    double duration = 0.5;
    double sample_rate = 5000.0;
    // conductor heating for the filters: since ignition (true) or over the window only
    bool delta_tc_since_ignition = true;
    // thresholds of the reported filters
    double delta_tc_filter = 2.87;
    double v_err_filter = 3e-5;

    void validate() const;
    double phase_voltage() const;
    double rating_current() const;
    double rating_va() const; // per phase
};

struct ScenarioParams {
    std::array<double, kDims> value{};
    double x_over_r = 1.0;
    bool fire = false;
    double fire_distance = 0.0; // m
    double burn_time = 0.0;     // s, at the end of the window
    double ignition_time = 0.0; // s, relative to the window start
};

ScenarioParams draw_params(const ScenarioCell &cell, const SweepConfig &cfg, Rng &rng);
sim::RunSpec build_run_spec(const ScenarioParams &params, const SweepConfig &cfg, std::uint64_t seed);

enum Flag : unsigned { flag_a = 1u, flag_b = 2u, flag_c = 4u };

struct RunOutcome {
    ScenarioParams params;
    bool discarded = false;
    bool fire_present = false;
    bool control1 = false;
    bool control2 = false;
    std::optional<double> control1_time;
    std::optional<double> control2_time;
    double delta_tc = 0.0; // per SweepConfig::delta_tc_since_ignition
    double loading = 0.0; // |S_R| / static rating
    unsigned flags = 0;
    detector::SlopeValues final_slopes;

    bool tripped(detector::Control c) const { return c == detector::Control::control1 ? control1 : control2; }
};

RunOutcome run_test(const ScenarioCell &cell, int test_index, const SweepConfig &cfg);

// Conditions a-c; the no-fire case carries no flags.
unsigned label_conditions(const RunOutcome &outcome, const ScenarioParams &params);

struct ConfusionMatrix {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    std::uint64_t discarded = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
    bool empty() const noexcept { return total() == 0; }
    // fractions of the non-discarded total; nullopt when empty
    std::optional<std::array<double, 4>> rates() const;
    void add(const RunOutcome &o, detector::Control c);
    ConfusionMatrix &operator+=(const ConfusionMatrix &o);
};

using OutcomeFilter = std::function<bool(const RunOutcome &)>;

ConfusionMatrix aggregate(const std::vector<RunOutcome> &outcomes, const OutcomeFilter &filter,
                          detector::Control control);

struct NamedFilter {
    std::string name;
    OutcomeFilter predicate;
};

std::vector<NamedFilter> standard_filters(const SweepConfig &cfg);

struct CellResult {
    ScenarioCell cell;
    std::vector<RunOutcome> outcomes;
};

struct SweepResult {
    std::uint64_t cells = 0;
    std::uint64_t runs = 0;
    std::uint64_t discarded = 0;
    std::vector<std::string> filter_names;
    // [control][filter]
    std::array<std::vector<ConfusionMatrix>, 2> matrices;
};

struct SweepCallbacks {
    // called in cell-index order on the calling thread
    std::function<void(const CellResult &)> on_cell;
    std::function<void(std::uint64_t done, std::uint64_t total)> on_progress;
};

// Cells are processed in chunks by `workers` threads; results are reduced in
// cell order, so output does not depend on the worker count.
SweepResult run_sweep(const SweepConfig &cfg, int workers, const SweepCallbacks &callbacks = {});

struct ReferenceRow {
    std::string control;
    std::string filter;
    double tp, tn, fp, fn; // percent
};

// Published confusion statistics (Table II) for side-by-side reporting.
const std::vector<ReferenceRow> &reference_rows();

} // namespace firedetect::mc
