#include "doctest.h"

#include "firedetect/firedetect.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string data(const char *name) { return std::string(FD_DATA_DIR) + "/" + name; }
std::string configs(const char *name) { return std::string(FD_CONFIG_DIR) + "/" + name; }

fs::path scratch(const char *name) {
    const fs::path p = fs::current_path() / "capi_scratch" / name;
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("status names and null handles") {
    CHECK(std::string(fd_status_name(FD_OK)) == "ok");
    CHECK(std::string(fd_version()).size() > 0);
    CHECK(fd_simulate(nullptr, nullptr) == FD_ERR_ARGUMENT);
    CHECK(std::string(fd_last_error()).size() > 0);
    size_t n = 0;
    CHECK(fd_trace_samples(nullptr, &n) == FD_ERR_ARGUMENT);
    fd_runspec_free(nullptr);
}

TEST_CASE("calibration through the C API") {
    fd_calibration *cal = nullptr;
    REQUIRE(fd_calibration_from_table(data("table1.csv").c_str(), 10.0, &cal) == FD_OK);
    double max_res = 0.0, held = 0.0, f = 0.0;
    CHECK(fd_calibration_residuals(cal, &max_res, &held) == FD_OK);
    CHECK(held < 0.01);
    CHECK(fd_calibration_factor(cal, 5.0, &f) == FD_OK);
    CHECK(f == doctest::Approx(9.8).epsilon(1e-3));
    CHECK(fd_calibration_factor(cal, 500.0, &f) == FD_ERR_DOMAIN);
    const fs::path dir = scratch("cal");
    CHECK(fd_calibration_write(cal, (dir / "c.json").c_str(), (dir / "r.csv").c_str()) == FD_OK);
    CHECK(fs::exists(dir / "c.json"));
    fd_calibration_free(cal);

    const fs::path bad = dir / "bad.csv";
    std::ofstream(bad) << "d_m,t_f_s,delta_ta_c\n5,10,30.99\n5,x,1\n";
    cal = nullptr;
    CHECK(fd_calibration_from_table(bad.c_str(), 10.0, &cal) == FD_ERR_CALIBRATION);
    CHECK(cal == nullptr);
    CHECK(std::string(fd_last_error()).find("line 3") != std::string::npos);
    CHECK(fd_calibration_from_table((dir / "missing.csv").c_str(), 10.0, &cal) == FD_ERR_IO);
}

TEST_CASE("run spec and simulation through the C API") {
    fd_runspec *spec = nullptr;
    REQUIRE(fd_runspec_load(configs("run_fire.yaml").c_str(), &spec) == FD_OK);
    fd_trace *trace = nullptr;
    REQUIRE(fd_simulate(spec, &trace) == FD_OK);
    size_t n = 0;
    CHECK(fd_trace_samples(trace, &n) == FD_OK);
    CHECK(n == 2500);
    int tripped = 0;
    double t = 0.0;
    CHECK(fd_trace_trip(trace, FD_CONTROL1, &tripped, &t) == FD_OK);
    CHECK(tripped == 1);
    CHECK(t > 0.0);
    CHECK(fd_trace_trip(trace, static_cast<fd_control>(9), &tripped, &t) == FD_ERR_ARGUMENT);
    const fs::path dir = scratch("sim");
    CHECK(fd_trace_write_csv(trace, (dir / "trace.csv").c_str()) == FD_OK);
    CHECK(fd_trace_write_svg(trace, (dir / "trace.svg").c_str(), "t") == FD_OK);
    CHECK(fd_trace_write_csv(trace, "/nonexistent/dir/trace.csv") == FD_ERR_IO);
    fd_trace_free(trace);

    char *yaml = nullptr;
    REQUIRE(fd_runspec_emit(spec, &yaml) == FD_OK);
    fd_runspec *again = nullptr;
    CHECK(fd_runspec_parse(yaml, &again) == FD_OK);
    fd_string_free(yaml);
    fd_runspec_free(again);
    fd_runspec_free(spec);

    spec = nullptr;
    CHECK(fd_runspec_parse("line: {bogus: 1}", &spec) == FD_ERR_VALIDATION);
    CHECK(std::string(fd_last_error()).find("line.bogus") != std::string::npos);
    CHECK(fd_runspec_parse("fire: {active: true, distance_m: 90}", &spec) == FD_ERR_VALIDATION);
    CHECK(std::string(fd_last_error()).find("distance") != std::string::npos);
}

TEST_CASE("sweep and rule mining through the C API") {
    fd_sweep_config *cfg = nullptr;
    REQUIRE(fd_sweep_config_default(&cfg) == FD_OK);
    CHECK(fd_sweep_config_set_subsample(cfg, "stratified:20") == FD_OK);
    CHECK(fd_sweep_config_set_subsample(cfg, "nope") == FD_ERR_VALIDATION);
    CHECK(fd_sweep_config_set_tests_per_cell(cfg, 5) == FD_OK);
    const fs::path dir = scratch("sweep");
    const std::string dataset = (dir / "dataset.csv").string();
    fd_sweep *sweep = nullptr;
    int calls = 0;
    REQUIRE(fd_sweep_run(cfg, 2, (dir / "cells.csv").c_str(), dataset.c_str(),
                         [](uint64_t, uint64_t, void *u) { ++*static_cast<int *>(u); }, &calls, &sweep) == FD_OK);
    CHECK(calls > 0);
    uint64_t cells = 0, runs = 0, discarded = 0;
    CHECK(fd_sweep_counts(sweep, &cells, &runs, &discarded) == FD_OK);
    CHECK(cells == 20);
    CHECK(runs == 100);
    char *json = nullptr;
    CHECK(fd_sweep_summary_json(sweep, &json) == FD_OK);
    CHECK(std::string(json).find("firedetect.sweep_summary v1") != std::string::npos);
    fd_string_free(json);
    fd_sweep_free(sweep);
    fd_sweep_config_free(cfg);

    fd_rules_config *rc = nullptr;
    REQUIRE(fd_rules_config_default(&rc) == FD_OK);
    fd_dataset *data = nullptr;
    REQUIRE(fd_dataset_load(dataset.c_str(), rc, &data) == FD_OK);
    size_t rows = 0, features = 0;
    CHECK(fd_dataset_shape(data, &rows, &features) == FD_OK);
    CHECK(rows + discarded == 100);
    CHECK(features > 5);
    fd_tree *tree = nullptr;
    REQUIRE(fd_tree_train(data, rc, &tree) == FD_OK);
    CHECK(fd_tree_write(tree, (dir / "tree.json").c_str(), (dir / "rules.json").c_str(),
                        (dir / "tree.txt").c_str(), (dir / "report.txt").c_str()) == FD_OK);
    fd_tree_free(tree);
    fd_dataset_free(data);

    const fs::path nolabel = dir / "nolabel.csv";
    std::ofstream(nolabel) << "a,b\n1,2\n";
    data = nullptr;
    CHECK(fd_dataset_load(nolabel.c_str(), rc, &data) == FD_ERR_VALIDATION);
    fd_rules_config_free(rc);
}
