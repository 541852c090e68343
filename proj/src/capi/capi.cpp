#include "firedetect/firedetect.h"

#include "firedetect/config.hpp"
#include "firedetect/dtree.hpp"
#include "firedetect/errors.hpp"
#include "firedetect/io.hpp"
#include "firedetect/montecarlo.hpp"
#include "firedetect/simulator.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <thread>

using namespace firedetect;

struct fd_calibration {
    thermal::FireCalibration cal;
    io::Reproduction reproduction;
};

struct fd_runspec {
    config::RunConfig cfg;
};

struct fd_trace {
    sim::RunSpec spec;
    sim::RunTrace trace;
};

struct fd_sweep_config {
    mc::SweepConfig cfg;
};

struct fd_sweep {
    mc::SweepConfig cfg;
    mc::SweepResult result;
};

struct fd_rules_config {
    config::RulesConfig cfg;
};

struct fd_dataset {
    dtree::Dataset data;
    std::string label;
};

struct fd_tree {
    dtree::Tree tree;
    std::vector<dtree::Rule> rules;
    double min_purity = 0.9;
    std::string label;
};

namespace {

thread_local std::string last_error;

class ArgumentError : public Error {
  public:
    using Error::Error;
};

template <typename F> fd_status guard(F &&f) {
    try {
        f();
        last_error.clear();
        return FD_OK;
    } catch (const ArgumentError &e) {
        last_error = e.what();
        return FD_ERR_ARGUMENT;
    } catch (const CalibrationError &e) {
        last_error = e.what();
        for (const auto &row : e.offending_rows()) {
            last_error += "\n  " + row;
        }
        return FD_ERR_CALIBRATION;
    } catch (const ValidationError &e) {
        last_error = e.what();
        return FD_ERR_VALIDATION;
    } catch (const DomainError &e) {
        last_error = e.what();
        return FD_ERR_DOMAIN;
    } catch (const InfeasibleError &e) {
        last_error = e.what();
        return FD_ERR_INFEASIBLE;
    } catch (const IoError &e) {
        last_error = e.what();
        return FD_ERR_IO;
    } catch (const std::bad_alloc &) {
        last_error = "out of memory";
        return FD_ERR_INTERNAL;
    } catch (const std::exception &e) {
        last_error = e.what();
        return FD_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return FD_ERR_INTERNAL;
    }
}

template <typename T> T &deref(T *p, const char *name) {
    if (!p) {
        throw ArgumentError(std::string(name) + " is null");
    }
    return *p;
}

const char *need(const char *s, const char *name) {
    if (!s) {
        throw ArgumentError(std::string(name) + " is null");
    }
    return s;
}

char *dup_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (!out) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename H, typename... Args> void make(H **out, Args &&...args) {
    deref(out, "out");
    *out = nullptr;
    *out = new H{std::forward<Args>(args)...};
}

void write_if(const char *path, const std::string &content) {
    if (path) {
        io::write_file(path, content);
    }
}

} // namespace

extern "C" {

const char *fd_version(void) { return "1.0.0"; }

const char *fd_status_name(fd_status status) {
    switch (status) {
    case FD_OK:
        return "ok";
    case FD_ERR_ARGUMENT:
        return "argument error";
    case FD_ERR_VALIDATION:
        return "validation error";
    case FD_ERR_CALIBRATION:
        return "calibration error";
    case FD_ERR_DOMAIN:
        return "domain error";
    case FD_ERR_INFEASIBLE:
        return "infeasible operating point";
    case FD_ERR_IO:
        return "i/o error";
    case FD_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

const char *fd_last_error(void) { return last_error.c_str(); }

void fd_string_free(char *s) { std::free(s); }

fd_status fd_csv_to_json(const char *csv_path, const char *json_path) {
    return guard([&] {
        std::ifstream in(need(csv_path, "csv_path"), std::ios::binary);
        if (!in) {
            throw IoError(std::string("cannot open '") + csv_path + "'");
        }
        io::write_file(need(json_path, "json_path"), io::csv_to_json(io::read_csv_table(in)));
    });
}

// ---- calibration ----

fd_status fd_calibration_from_table(const char *table_csv, double fit_t_f, fd_calibration **out) {
    return guard([&] {
        const auto rows = io::read_fire_table_file(need(table_csv, "table_csv"));
        thermal::FireCalibration cal;
        io::Reproduction rep = io::reproduce_table(rows, fit_t_f, &cal);
        make(out, cal, std::move(rep));
    });
}

fd_status fd_calibration_residuals(const fd_calibration *cal, double *max_residual, double *max_held_out) {
    return guard([&] {
        const auto &c = deref(cal, "calibration");
        if (max_residual) {
            *max_residual = c.reproduction.max_residual;
        }
        if (max_held_out) {
            *max_held_out = c.reproduction.max_held_out;
        }
    });
}

fd_status fd_calibration_factor(const fd_calibration *cal, double d, double *f) {
    return guard([&] { deref(f, "f") = deref(cal, "calibration").cal.factor(d); });
}

fd_status fd_calibration_write(const fd_calibration *cal, const char *calibration_json, const char *report_csv) {
    return guard([&] {
        const auto &c = deref(cal, "calibration");
        write_if(calibration_json, io::calibration_to_json(c.cal));
        if (report_csv) {
            std::ostringstream os;
            io::write_reproduction_csv(os, c.reproduction);
            io::write_file(report_csv, os.str());
        }
    });
}

void fd_calibration_free(fd_calibration *cal) { delete cal; }

fd_status fd_catalogue_default_emit(char **yaml) {
    return guard([&] { deref(yaml, "yaml") = dup_string(config::emit_catalogue(thermal::default_catalogue())); });
}

// ---- runs ----

fd_status fd_runspec_default(fd_runspec **out) {
    return guard([&] { make(out, config::RunConfig{}); });
}

fd_status fd_runspec_load(const char *path, fd_runspec **out) {
    return guard([&] {
        auto cfg = config::load_run_config(need(path, "path"));
        cfg.to_run_spec().validate();
        make(out, std::move(cfg));
    });
}

fd_status fd_runspec_parse(const char *text, fd_runspec **out) {
    return guard([&] {
        auto cfg = config::parse_run_config(need(text, "text"));
        cfg.to_run_spec().validate();
        make(out, std::move(cfg));
    });
}

fd_status fd_runspec_set_seed(fd_runspec *spec, uint64_t seed) {
    return guard([&] { deref(spec, "spec").cfg.seed = seed; });
}

fd_status fd_runspec_emit(const fd_runspec *spec, char **yaml) {
    return guard([&] {
        const std::string s = config::emit_run_config(deref(spec, "spec").cfg);
        deref(yaml, "yaml") = dup_string(s);
    });
}

void fd_runspec_free(fd_runspec *spec) { delete spec; }

fd_status fd_simulate(const fd_runspec *spec, fd_trace **out) {
    return guard([&] {
        sim::RunSpec rs = deref(spec, "spec").cfg.to_run_spec();
        rs.validate();
        sim::RunTrace trace = sim::run(rs);
        make(out, std::move(rs), std::move(trace));
    });
}

fd_status fd_trace_samples(const fd_trace *trace, size_t *count) {
    return guard([&] { deref(count, "count") = deref(trace, "trace").trace.records.size(); });
}

fd_status fd_trace_discarded(const fd_trace *trace, int *discarded) {
    return guard([&] { deref(discarded, "discarded") = deref(trace, "trace").trace.summary.discarded ? 1 : 0; });
}

fd_status fd_trace_trip(const fd_trace *trace, fd_control control, int *tripped, double *time) {
    return guard([&] {
        const auto &s = deref(trace, "trace").trace.summary;
        std::optional<double> t;
        if (control == FD_CONTROL1) {
            t = s.control1_time;
        } else if (control == FD_CONTROL2) {
            t = s.control2_time;
        } else {
            throw ArgumentError("control must be FD_CONTROL1 or FD_CONTROL2");
        }
        deref(tripped, "tripped") = t ? 1 : 0;
        if (t && time) {
            *time = *t;
        }
    });
}

fd_status fd_trace_write_csv(const fd_trace *trace, const char *path) {
    return guard([&] {
        const auto &t = deref(trace, "trace");
        std::ofstream out(need(path, "path"), std::ios::binary);
        if (!out) {
            throw IoError(std::string("cannot write '") + path + "'");
        }
        io::write_trace_csv(out, t.trace);
        if (!out) {
            throw IoError(std::string("write failed for '") + path + "'");
        }
    });
}

fd_status fd_trace_write_measurements(const fd_trace *trace, const char *path) {
    return guard([&] {
        std::ostringstream os;
        io::write_measurement_csv(os, deref(trace, "trace").trace);
        io::write_file(need(path, "path"), os.str());
    });
}

fd_status fd_trace_write_summary(const fd_trace *trace, const char *path) {
    return guard([&] {
        const auto &t = deref(trace, "trace");
        io::write_file(need(path, "path"), io::summary_to_json(t.trace, t.spec));
    });
}

fd_status fd_trace_write_trips(const fd_trace *trace, const char *path) {
    return guard([&] { io::write_file(need(path, "path"), io::trips_to_json(deref(trace, "trace").trace.trips)); });
}

fd_status fd_trace_write_svg(const fd_trace *trace, const char *path, const char *title) {
    return guard([&] {
        io::write_file(need(path, "path"), io::trace_to_svg(deref(trace, "trace").trace, title ? title : ""));
    });
}

void fd_trace_free(fd_trace *trace) { delete trace; }

// ---- sweeps ----

fd_status fd_sweep_config_default(fd_sweep_config **out) {
    return guard([&] { make(out, mc::SweepConfig{}); });
}

fd_status fd_sweep_config_load(const char *path, fd_sweep_config **out) {
    return guard([&] { make(out, config::load_sweep_config(need(path, "path"))); });
}

fd_status fd_sweep_config_set_seed(fd_sweep_config *cfg, uint64_t seed) {
    return guard([&] { deref(cfg, "cfg").cfg.seed = seed; });
}

fd_status fd_sweep_config_set_subsample(fd_sweep_config *cfg, const char *subsample) {
    return guard([&] { deref(cfg, "cfg").cfg.subsample = mc::Subsample::parse(need(subsample, "subsample")); });
}

fd_status fd_sweep_config_set_tests_per_cell(fd_sweep_config *cfg, int tests) {
    return guard([&] {
        auto &c = deref(cfg, "cfg").cfg;
        const int old = c.tests_per_cell;
        c.tests_per_cell = tests;
        try {
            c.validate();
        } catch (...) {
            c.tests_per_cell = old;
            throw;
        }
    });
}

fd_status fd_sweep_config_emit(const fd_sweep_config *cfg, char **yaml) {
    return guard([&] { deref(yaml, "yaml") = dup_string(config::emit_sweep_config(deref(cfg, "cfg").cfg)); });
}

void fd_sweep_config_free(fd_sweep_config *cfg) { delete cfg; }

fd_status fd_sweep_run(const fd_sweep_config *cfg, int workers, const char *cells_csv, const char *dataset_csv,
                       fd_progress_fn progress, void *user, fd_sweep **out) {
    return guard([&] {
        const mc::SweepConfig &c = deref(cfg, "cfg").cfg;
        deref(out, "out") = nullptr;
        c.validate();
        if (workers <= 0) {
            workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        }
        std::ofstream cells, dataset;
        if (cells_csv) {
            cells.open(cells_csv, std::ios::binary);
            if (!cells) {
                throw IoError(std::string("cannot write '") + cells_csv + "'");
            }
            io::write_cells_header(cells);
        }
        if (dataset_csv) {
            dataset.open(dataset_csv, std::ios::binary);
            if (!dataset) {
                throw IoError(std::string("cannot write '") + dataset_csv + "'");
            }
            io::write_dataset_header(dataset);
        }
        mc::SweepCallbacks cb;
        cb.on_cell = [&](const mc::CellResult &cell) {
            if (cells_csv) {
                io::write_cell_row(cells, cell);
            }
            if (dataset_csv) {
                io::write_dataset_rows(dataset, cell, c);
            }
        };
        if (progress) {
            cb.on_progress = [&](std::uint64_t done, std::uint64_t total) { progress(done, total, user); };
        }
        mc::SweepResult result = mc::run_sweep(c, workers, cb);
        if ((cells_csv && !cells.flush()) || (dataset_csv && !dataset.flush())) {
            throw IoError("failed writing sweep outputs");
        }
        make(out, c, std::move(result));
    });
}

fd_status fd_sweep_counts(const fd_sweep *sweep, uint64_t *cells, uint64_t *runs, uint64_t *discarded) {
    return guard([&] {
        const auto &r = deref(sweep, "sweep").result;
        if (cells) {
            *cells = r.cells;
        }
        if (runs) {
            *runs = r.runs;
        }
        if (discarded) {
            *discarded = r.discarded;
        }
    });
}

fd_status fd_sweep_summary_json(const fd_sweep *sweep, char **json) {
    return guard([&] {
        const auto &s = deref(sweep, "sweep");
        deref(json, "json") = dup_string(io::sweep_summary_to_json(s.result, s.cfg));
    });
}

fd_status fd_sweep_write_summary(const fd_sweep *sweep, const char *path) {
    return guard([&] {
        const auto &s = deref(sweep, "sweep");
        io::write_file(need(path, "path"), io::sweep_summary_to_json(s.result, s.cfg));
    });
}

fd_status fd_sweep_write_report(const fd_sweep *sweep, const char *path) {
    return guard([&] {
        const auto &s = deref(sweep, "sweep");
        io::write_file(need(path, "path"), io::sweep_report(s.result, s.cfg));
    });
}

void fd_sweep_free(fd_sweep *sweep) { delete sweep; }

// ---- rules ----

fd_status fd_rules_config_default(fd_rules_config **out) {
    return guard([&] { make(out, config::RulesConfig{}); });
}

fd_status fd_rules_config_load(const char *path, fd_rules_config **out) {
    return guard([&] { make(out, config::load_rules_config(need(path, "path"))); });
}

fd_status fd_rules_config_emit(const fd_rules_config *cfg, char **yaml) {
    return guard([&] { deref(yaml, "yaml") = dup_string(config::emit_rules_config(deref(cfg, "cfg").cfg)); });
}

void fd_rules_config_free(fd_rules_config *cfg) { delete cfg; }

fd_status fd_dataset_load(const char *csv, const fd_rules_config *cfg, fd_dataset **out) {
    return guard([&] {
        const auto &c = deref(cfg, "cfg").cfg;
        make(out, dtree::read_csv_file(need(csv, "csv"), c.label, c.exclude), c.label);
    });
}

fd_status fd_dataset_shape(const fd_dataset *data, size_t *rows, size_t *features) {
    return guard([&] {
        const auto &d = deref(data, "data").data;
        if (rows) {
            *rows = d.rows();
        }
        if (features) {
            *features = d.features();
        }
    });
}

void fd_dataset_free(fd_dataset *data) { delete data; }

fd_status fd_tree_train(const fd_dataset *data, const fd_rules_config *cfg, fd_tree **out) {
    return guard([&] {
        const auto &d = deref(data, "data");
        const auto &c = deref(cfg, "cfg").cfg;
        dtree::Tree tree = dtree::train(d.data, c.train);
        auto rules = dtree::extract_rules(tree, c.min_purity);
        make(out, std::move(tree), std::move(rules), c.min_purity, d.label);
    });
}

fd_status fd_tree_rule_count(const fd_tree *tree, size_t *count) {
    return guard([&] { deref(count, "count") = deref(tree, "tree").rules.size(); });
}

fd_status fd_tree_write(const fd_tree *tree, const char *tree_json, const char *rules_json, const char *tree_text,
                        const char *report) {
    return guard([&] {
        const auto &t = deref(tree, "tree");
        write_if(tree_json, dtree::tree_to_json(t.tree));
        write_if(rules_json, dtree::rules_to_json(t.rules, t.min_purity));
        write_if(tree_text, dtree::tree_to_text(t.tree));
        write_if(report, io::rules_report(t.tree, t.rules, t.label));
    });
}

void fd_tree_free(fd_tree *tree) { delete tree; }

} // extern "C"
