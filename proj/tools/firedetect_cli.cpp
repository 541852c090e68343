#include "firedetect/firedetect.h"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    std::string out;
    std::string format = "csv";
    std::string subsample;
    std::string log_level = "info";
};

// Carries a status out of a command; mapped to the exit code in main.
struct Failure {
    fd_status status;
};

int exit_code(fd_status s) {
    switch (s) {
    case FD_OK:
        return 0;
    case FD_ERR_ARGUMENT:
    case FD_ERR_VALIDATION:
    case FD_ERR_CALIBRATION:
        return 2;
    default:
        return 1;
    }
}

void check(fd_status s, const std::string &what) {
    if (s != FD_OK) {
        spdlog::error("{}: {}: {}", what, fd_status_name(s), fd_last_error());
        throw Failure{s};
    }
}

template <typename T, void (*Free)(T *)> struct Handle {
    T *p = nullptr;
    Handle() = default;
    Handle(const Handle &) = delete;
    Handle &operator=(const Handle &) = delete;
    ~Handle() { Free(p); }
    T **out() { return &p; }
    T *get() const { return p; }
};

using RunSpec = Handle<fd_runspec, fd_runspec_free>;
using Trace = Handle<fd_trace, fd_trace_free>;
using SweepConfig = Handle<fd_sweep_config, fd_sweep_config_free>;
using Sweep = Handle<fd_sweep, fd_sweep_free>;
using RulesConfig = Handle<fd_rules_config, fd_rules_config_free>;
using Dataset = Handle<fd_dataset, fd_dataset_free>;
using Tree = Handle<fd_tree, fd_tree_free>;
using Calibration = Handle<fd_calibration, fd_calibration_free>;

std::string take(char *s) {
    std::string out = s ? s : "";
    fd_string_free(s);
    return out;
}

fs::path output_dir(const Globals &g) {
    fs::path dir = g.out;
    if (dir.empty()) {
        const char *env = std::getenv("FIREDETECT_OUT");
        dir = env && *env ? env : "out";
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        spdlog::error("cannot create output directory '{}': {}", dir.string(), ec.message());
        throw Failure{FD_ERR_IO};
    }
    return dir;
}

// Writes a CSV through `write`, then converts it when JSON was requested.
void emit_table(const Globals &g, const fs::path &dir, const std::string &stem,
                const std::function<fd_status(const char *)> &write) {
    const fs::path csv = dir / (stem + ".csv");
    check(write(csv.string().c_str()), "writing " + csv.string());
    if (g.format == "json") {
        const fs::path js = dir / (stem + ".json");
        check(fd_csv_to_json(csv.string().c_str(), js.string().c_str()), "writing " + js.string());
        fs::remove(csv);
        spdlog::info("wrote {}", js.string());
    } else {
        spdlog::info("wrote {}", csv.string());
    }
}

void cmd_calibrate(const Globals &g, const std::string &table, double fit_t_f) {
    const fs::path dir = output_dir(g);
    Calibration cal;
    check(fd_calibration_from_table(table.c_str(), fit_t_f, cal.out()), "calibrating from " + table);
    const fs::path cal_path = dir / "calibration.json";
    check(fd_calibration_write(cal.get(), cal_path.string().c_str(), nullptr), "writing calibration");
    spdlog::info("wrote {}", cal_path.string());
    emit_table(g, dir, "table1_reproduction",
               [&](const char *p) { return fd_calibration_write(cal.get(), nullptr, p); });
    double max_residual = 0.0, max_held_out = 0.0;
    check(fd_calibration_residuals(cal.get(), &max_residual, &max_held_out), "residuals");
    std::printf("max residual %.4f%% (held-out rows %.4f%%)\n", 100.0 * max_residual, 100.0 * max_held_out);
    if (max_residual > 0.01) {
        spdlog::error("table rows deviate from the sqrt(t_f) law by more than 1%; see the reproduction report");
        throw Failure{FD_ERR_CALIBRATION};
    }
}

void cmd_simulate(const Globals &g, bool plot) {
    RunSpec spec;
    if (g.config.empty()) {
        check(fd_runspec_default(spec.out()), "default run");
    } else {
        check(fd_runspec_load(g.config.c_str(), spec.out()), "loading " + g.config);
    }
    if (g.seed) {
        check(fd_runspec_set_seed(spec.get(), *g.seed), "seed");
    }
    const fs::path dir = output_dir(g);
    Trace trace;
    check(fd_simulate(spec.get(), trace.out()), "simulation");
    emit_table(g, dir, "trace", [&](const char *p) { return fd_trace_write_csv(trace.get(), p); });
    emit_table(g, dir, "measurements", [&](const char *p) { return fd_trace_write_measurements(trace.get(), p); });
    check(fd_trace_write_summary(trace.get(), (dir / "summary.json").string().c_str()), "summary");
    check(fd_trace_write_trips(trace.get(), (dir / "trips.json").string().c_str()), "trips");
    if (plot) {
        check(fd_trace_write_svg(trace.get(), (dir / "trace.svg").string().c_str(), "firedetect run"), "plot");
    }
    int discarded = 0;
    check(fd_trace_discarded(trace.get(), &discarded), "trace");
    if (discarded) {
        spdlog::warn("run discarded: the operating point became infeasible");
    }
    for (fd_control c : {FD_CONTROL1, FD_CONTROL2}) {
        int tripped = 0;
        double t = 0.0;
        check(fd_trace_trip(trace.get(), c, &tripped, &t), "trip");
        if (tripped) {
            std::printf("control%d trip at %.6f s\n", c, t);
        } else {
            std::printf("control%d no trip\n", c);
        }
    }
}

void progress(std::uint64_t done, std::uint64_t total, void *user) {
    auto *next = static_cast<std::uint64_t *>(user);
    if (done >= *next || done == total) {
        spdlog::info("{}/{} cells", done, total);
        *next = done + std::max<std::uint64_t>(1, total / 20);
    }
}

void cmd_sweep(const Globals &g, int tests_per_cell) {
    SweepConfig cfg;
    if (g.config.empty()) {
        check(fd_sweep_config_default(cfg.out()), "default sweep");
    } else {
        check(fd_sweep_config_load(g.config.c_str(), cfg.out()), "loading " + g.config);
    }
    if (g.seed) {
        check(fd_sweep_config_set_seed(cfg.get(), *g.seed), "seed");
    }
    if (!g.subsample.empty()) {
        check(fd_sweep_config_set_subsample(cfg.get(), g.subsample.c_str()), "subsample");
    }
    if (tests_per_cell > 0) {
        check(fd_sweep_config_set_tests_per_cell(cfg.get(), tests_per_cell), "tests per cell");
    }
    const fs::path dir = output_dir(g);
    const fs::path cells = dir / "cells.csv";
    const fs::path dataset = dir / "dataset.csv";
    std::uint64_t next = 0;
    Sweep sweep;
    check(fd_sweep_run(cfg.get(), g.workers, cells.string().c_str(), dataset.string().c_str(), progress, &next,
                       sweep.out()),
          "sweep");
    if (g.format == "json") {
        check(fd_csv_to_json(cells.string().c_str(), (dir / "cells.json").string().c_str()), "cells json");
        fs::remove(cells);
    }
    check(fd_sweep_write_summary(sweep.get(), (dir / "summary.json").string().c_str()), "summary");
    check(fd_sweep_write_report(sweep.get(), (dir / "report.md").string().c_str()), "report");
    std::uint64_t n_cells = 0, runs = 0, discarded = 0;
    check(fd_sweep_counts(sweep.get(), &n_cells, &runs, &discarded), "counts");
    std::printf("%llu cells, %llu runs, %llu discarded\n", static_cast<unsigned long long>(n_cells),
                static_cast<unsigned long long>(runs), static_cast<unsigned long long>(discarded));
    spdlog::info("outputs in {}", dir.string());
}

void cmd_train(const Globals &g, const std::string &csv) {
    RulesConfig cfg;
    if (g.config.empty()) {
        check(fd_rules_config_default(cfg.out()), "default rules config");
    } else {
        check(fd_rules_config_load(g.config.c_str(), cfg.out()), "loading " + g.config);
    }
    Dataset data;
    check(fd_dataset_load(csv.c_str(), cfg.get(), data.out()), "loading " + csv);
    std::size_t rows = 0, features = 0;
    check(fd_dataset_shape(data.get(), &rows, &features), "dataset");
    spdlog::info("{} rows, {} features", rows, features);
    Tree tree;
    check(fd_tree_train(data.get(), cfg.get(), tree.out()), "training");
    const fs::path dir = output_dir(g);
    check(fd_tree_write(tree.get(), (dir / "tree.json").string().c_str(), (dir / "rules.json").string().c_str(),
                        (dir / "tree.txt").string().c_str(), (dir / "rules_report.txt").string().c_str()),
          "writing rules");
    std::size_t n = 0;
    check(fd_tree_rule_count(tree.get(), &n), "rules");
    std::printf("%zu rule(s) written to %s\n", n, dir.string().c_str());
}

void cmd_defaults(const std::string &which) {
    char *text = nullptr;
    if (which == "run") {
        RunSpec spec;
        check(fd_runspec_default(spec.out()), "defaults");
        check(fd_runspec_emit(spec.get(), &text), "defaults");
    } else if (which == "sweep") {
        SweepConfig cfg;
        check(fd_sweep_config_default(cfg.out()), "defaults");
        check(fd_sweep_config_emit(cfg.get(), &text), "defaults");
    } else if (which == "conductors") {
        check(fd_catalogue_default_emit(&text), "defaults");
    } else {
        RulesConfig cfg;
        check(fd_rules_config_default(cfg.out()), "defaults");
        check(fd_rules_config_emit(cfg.get(), &text), "defaults");
    }
    std::cout << take(text);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Fire detection near overhead lines from synchrophasor line-impedance monitoring"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    auto add_globals = [&](CLI::App *cmd) {
        cmd->add_option("--config", g.config, "config file (YAML or JSON)")->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "override the config seed");
        cmd->add_option("--out", g.out, "output directory (default $FIREDETECT_OUT or ./out)");
        cmd->add_option("--format", g.format, "tabular output format")->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off")
            ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
    };

    std::string table;
    double fit_t_f = 10.0;
    auto *calibrate = app.add_subcommand("calibrate-fire", "fit f(d) from a fire table and report the reproduction");
    calibrate->add_option("table", table, "fire table CSV (d_m,t_f_s,delta_ta_c)")->required();
    calibrate->add_option("--fit-tf", fit_t_f, "fit only the rows with this t_f; <= 0 fits every row");
    add_globals(calibrate);

    bool no_plot = false;
    auto *simulate = app.add_subcommand("simulate", "run one scenario and write its trace, summary and plot");
    simulate->add_flag("--no-plot", no_plot, "skip the SVG plot");
    add_globals(simulate);

    int tests_per_cell = 0;
    auto *sweep = app.add_subcommand("sweep", "Monte Carlo sweep over the scenario grid");
    sweep->add_option("--workers", g.workers, "worker threads (default: all cores)");
    sweep->add_option("--subsample", g.subsample, "full, stratified:N or lhs:N");
    sweep->add_option("--tests-per-cell", tests_per_cell, "override tests per cell");
    add_globals(sweep);

    std::string dataset;
    auto *train = app.add_subcommand("train-rules", "train a decision tree and extract rules from a dataset");
    train->add_option("dataset", dataset, "dataset CSV with a label column")->required();
    add_globals(train);

    std::string which = "run";
    auto *defaults = app.add_subcommand("print-defaults", "print a default config");
    defaults->add_option("kind", which, "run, sweep, rules or conductors")
        ->check(CLI::IsMember({"run", "sweep", "rules", "conductors"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    auto logger = spdlog::stderr_color_mt("firedetect");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::from_str(g.log_level));
    for (auto *cmd : {calibrate, simulate, sweep, train}) {
        if (cmd->parsed() && cmd->count("--seed")) {
            g.seed = seed;
        }
    }

    try {
        if (calibrate->parsed()) {
            cmd_calibrate(g, table, fit_t_f);
        } else if (simulate->parsed()) {
            cmd_simulate(g, !no_plot);
        } else if (sweep->parsed()) {
            cmd_sweep(g, tests_per_cell);
        } else if (train->parsed()) {
            cmd_train(g, dataset);
        } else if (defaults->parsed()) {
            cmd_defaults(which);
        }
    } catch (const Failure &f) {
        return exit_code(f.status);
    } catch (const std::exception &e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
