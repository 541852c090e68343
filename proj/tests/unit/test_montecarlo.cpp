#include "doctest.h"

#include "firedetect/errors.hpp"
#include "firedetect/montecarlo.hpp"

#include <set>

using namespace firedetect;
using namespace firedetect::mc;

namespace {

SweepConfig tiny_sweep() {
    SweepConfig cfg;
    cfg.subsample = Subsample{SubsampleKind::stratified, 12};
    cfg.tests_per_cell = 3;
    cfg.seed = 5;
    return cfg;
}

RunOutcome outcome(bool fire, bool trip) {
    RunOutcome o;
    o.fire_present = fire;
    o.control1 = trip;
    o.control2 = trip;
    return o;
}

ScenarioCell point_cell(const std::array<double, kDims> &v) {
    ScenarioCell c;
    for (int d = 0; d < kDims; ++d) {
        c.bounds[static_cast<std::size_t>(d)] = Interval{v[static_cast<std::size_t>(d)], v[static_cast<std::size_t>(d)]};
    }
    c.seed = 77;
    return c;
}

} // namespace

TEST_CASE("cell counts") {
    ScenarioGrid g;
    CHECK(g.cell_count() == 1953125u);
    CHECK(CellGenerator(g, Subsample{}, 1, 1).size() == 1953125u);
    for (auto &r : g.dims) {
        r.intervals = 1;
    }
    CHECK(g.cell_count() == 1u);
    CHECK(generate_cells(g, Subsample{}, 1, 4).size() == 1u);
}

TEST_CASE("subsample parsing") {
    CHECK(Subsample::parse("full").kind == SubsampleKind::full);
    CHECK(Subsample::parse("stratified:19683").n == 19683u);
    CHECK(Subsample::parse("lhs:10").kind == SubsampleKind::lhs);
    CHECK(Subsample::parse("lhs:10").to_string() == "lhs:10");
    CHECK_THROWS_AS(Subsample::parse("lhs:0"), ValidationError);
    CHECK_THROWS_AS(Subsample::parse("random:5"), ValidationError);
    CHECK_THROWS_AS(Subsample::parse("stratified:5x"), ValidationError);
}

TEST_CASE("stratified cells are reproducible and seed dependent") {
    const ScenarioGrid g;
    const Subsample s{SubsampleKind::stratified, 1000};
    const auto a = generate_cells(g, s, 1, 1);
    const auto b = generate_cells(g, s, 1, 1);
    const auto c = generate_cells(g, s, 2, 1);
    REQUIRE(a.size() == 1000);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].interval_index == b[i].interval_index);
        REQUIRE(a[i].seed == b[i].seed);
        differs = differs || a[i].interval_index != c[i].interval_index;
    }
    CHECK(differs);
    // each stratum of every dimension is visited equally often
    for (int d = 0; d < kDims; ++d) {
        std::array<int, 5> counts{};
        for (const auto &cell : a) {
            ++counts[static_cast<std::size_t>(cell.interval_index[static_cast<std::size_t>(d)])];
        }
        for (int k : counts) {
            REQUIRE(k == 200);
        }
    }
}

TEST_CASE("latin hypercube cells cover every stratum once") {
    const ScenarioGrid g;
    const auto cells = generate_cells(g, Subsample{SubsampleKind::lhs, 50}, 3, 1);
    REQUIRE(cells.size() == 50);
    for (int d = 0; d < kDims; ++d) {
        std::set<double> lows;
        for (const auto &c : cells) {
            lows.insert(c.bounds[static_cast<std::size_t>(d)].lo);
        }
        REQUIRE(lows.size() == 50);
    }
}

TEST_CASE("zero ambient rise and zero noise is a true negative") {
    SweepConfig cfg;
    cfg.measurement = measurement::MeasurementModel::ideal();
    const auto cell = point_cell({0.0, 30.0, 2.0, 40.0, 10.0, 800.0, 0.0, 0.0, 0.0});
    const RunOutcome o = run_test(cell, 0, cfg);
    CHECK_FALSE(o.discarded);
    CHECK_FALSE(o.fire_present);
    CHECK_FALSE(o.control1);
    CHECK(o.flags == 0);
}

TEST_CASE("condition b draw near a fire is a true positive") {
    SweepConfig cfg;
    const auto cell = point_cell({150.0, 30.0, 0.5, 60.0, 10.0, 1600.0, 0.0, 0.003, 0.006});
    const RunOutcome o = run_test(cell, 0, cfg);
    REQUIRE_FALSE(o.discarded);
    CHECK(o.fire_present);
    CHECK(o.loading > 0.9);
    CHECK((o.flags & flag_b) != 0);
    CHECK((o.flags & flag_a) != 0);
    CHECK(o.control1);
    const RunOutcome again = run_test(cell, 0, cfg);
    CHECK(again.control1_time == o.control1_time);
    CHECK(again.delta_tc == o.delta_tc);
}

TEST_CASE("label conditions") {
    ScenarioParams p;
    RunOutcome o;
    o.fire_present = true;
    p.value[delta_ta] = 80.0;
    p.value[v_w] = 3.0;
    p.value[t_s] = 80.0;
    o.loading = 0.3;
    CHECK(label_conditions(o, p) == flag_a);
    p.value[delta_ta] = 10.0;
    p.value[v_w] = 1.0;
    o.loading = 0.95;
    CHECK(label_conditions(o, p) == flag_b);
    p.value[delta_ta] = 50.0;
    p.value[t_s] = 40.0;
    p.value[v_w] = 3.0;
    o.loading = 0.6;
    CHECK(label_conditions(o, p) == flag_c);
    o.fire_present = false;
    p.value[delta_ta] = 0.0;
    p.value[v_w] = 0.1;
    o.loading = 0.99;
    CHECK(label_conditions(o, p) == 0);
}

TEST_CASE("aggregate examples") {
    const std::vector<RunOutcome> tp(5, outcome(true, true));
    const auto all = [](const RunOutcome &) { return true; };
    auto r = aggregate(tp, all, detector::Control::control1).rates();
    REQUIRE(r.has_value());
    CHECK((*r)[0] == 1.0);
    CHECK((*r)[1] == 0.0);
    const std::vector<RunOutcome> mix{outcome(true, true), outcome(false, false), outcome(false, true),
                                      outcome(true, false)};
    r = aggregate(mix, all, detector::Control::control1).rates();
    for (double x : *r) {
        CHECK(x == 0.25);
    }
    CHECK_FALSE(aggregate(mix, [](const RunOutcome &) { return false; }, detector::Control::control1)
                    .rates()
                    .has_value());
    const auto &ref = reference_rows();
    REQUIRE_FALSE(ref.empty());
    CHECK(ref.front().tp == doctest::Approx(99.32));
}

TEST_CASE("sweep partition, determinism and worker independence") {
    const SweepConfig cfg = tiny_sweep();
    std::vector<RunOutcome> outcomes;
    SweepCallbacks cb;
    cb.on_cell = [&](const CellResult &c) { outcomes.insert(outcomes.end(), c.outcomes.begin(), c.outcomes.end()); };
    const SweepResult one = run_sweep(cfg, 1, cb);
    const SweepResult three = run_sweep(cfg, 3);
    CHECK(one.cells == 12);
    CHECK(one.runs == 36);
    REQUIRE(outcomes.size() == 36);
    const auto filters = standard_filters(cfg);
    for (int c = 0; c < 2; ++c) {
        for (std::size_t f = 0; f < filters.size(); ++f) {
            const auto &a = one.matrices[static_cast<std::size_t>(c)][f];
            const auto &b = three.matrices[static_cast<std::size_t>(c)][f];
            REQUIRE(a.tp == b.tp);
            REQUIRE(a.tn == b.tn);
            REQUIRE(a.fp == b.fp);
            REQUIRE(a.fn == b.fn);
            REQUIRE(a.discarded == b.discarded);
            std::uint64_t selected = 0;
            for (const auto &o : outcomes) {
                selected += filters[f].predicate(o) ? 1 : 0;
            }
            REQUIRE(a.total() + a.discarded == selected);
        }
    }
    CHECK(one.matrices[0][0].total() + one.matrices[0][0].discarded == 36);
    CHECK_THROWS_AS(run_sweep(cfg, 0), ValidationError);
}
