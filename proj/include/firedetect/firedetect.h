#ifndef FIREDETECT_H
#define FIREDETECT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define FD_API __declspec(dllexport)
#else
#define FD_API __attribute__((visibility("default")))
#endif

typedef enum fd_status {
    FD_OK = 0,
    FD_ERR_ARGUMENT = 1,    /* null handle or pointer, bad enum value */
    FD_ERR_VALIDATION = 2,  /* malformed config, dataset or schema */
    FD_ERR_CALIBRATION = 3, /* fire table rows inconsistent or malformed */
    FD_ERR_DOMAIN = 4,      /* input outside a model's domain */
    FD_ERR_INFEASIBLE = 5,  /* load beyond the transfer capability */
    FD_ERR_IO = 6,
    FD_ERR_INTERNAL = 7
} fd_status;

typedef enum fd_control { FD_CONTROL1 = 1, FD_CONTROL2 = 2 } fd_control;

typedef struct fd_calibration fd_calibration;
typedef struct fd_runspec fd_runspec;
typedef struct fd_trace fd_trace;
typedef struct fd_sweep_config fd_sweep_config;
typedef struct fd_sweep fd_sweep;
typedef struct fd_rules_config fd_rules_config;
typedef struct fd_dataset fd_dataset;
typedef struct fd_tree fd_tree;

FD_API const char *fd_version(void);
FD_API const char *fd_status_name(fd_status status);
/* Message of the last failed call on this thread; "" when none. */
FD_API const char *fd_last_error(void);
/* Frees strings returned through char ** out-parameters. */
FD_API void fd_string_free(char *s);

/* Converts one of the tool's CSV outputs to columnar JSON
   {"schema", "columns", "rows"}; empty fields become null. */
FD_API fd_status fd_csv_to_json(const char *csv_path, const char *json_path);

/* Fire calibration. Fits f(d) from the rows at fit_t_f (every row when
   fit_t_f <= 0) and keeps the per-row reproduction. */
FD_API fd_status fd_calibration_from_table(const char *table_csv, double fit_t_f, fd_calibration **out);
FD_API fd_status fd_calibration_residuals(const fd_calibration *cal, double *max_residual, double *max_held_out);
FD_API fd_status fd_calibration_factor(const fd_calibration *cal, double d, double *f);
FD_API fd_status fd_calibration_write(const fd_calibration *cal, const char *calibration_json, const char *report_csv);
FD_API void fd_calibration_free(fd_calibration *cal);

/* Built-in conductor catalogue and heat-balance constants as YAML. */
FD_API fd_status fd_catalogue_default_emit(char **yaml);

/* Single runs. */
FD_API fd_status fd_runspec_default(fd_runspec **out);
FD_API fd_status fd_runspec_load(const char *path, fd_runspec **out);
FD_API fd_status fd_runspec_parse(const char *text, fd_runspec **out);
FD_API fd_status fd_runspec_set_seed(fd_runspec *spec, uint64_t seed);
FD_API fd_status fd_runspec_emit(const fd_runspec *spec, char **yaml);
FD_API void fd_runspec_free(fd_runspec *spec);

FD_API fd_status fd_simulate(const fd_runspec *spec, fd_trace **out);
FD_API fd_status fd_trace_samples(const fd_trace *trace, size_t *count);
FD_API fd_status fd_trace_discarded(const fd_trace *trace, int *discarded);
/* tripped = 0 and time untouched when the control never fired */
FD_API fd_status fd_trace_trip(const fd_trace *trace, fd_control control, int *tripped, double *time);
FD_API fd_status fd_trace_write_csv(const fd_trace *trace, const char *path);
FD_API fd_status fd_trace_write_measurements(const fd_trace *trace, const char *path);
FD_API fd_status fd_trace_write_summary(const fd_trace *trace, const char *path);
FD_API fd_status fd_trace_write_trips(const fd_trace *trace, const char *path);
FD_API fd_status fd_trace_write_svg(const fd_trace *trace, const char *path, const char *title);
FD_API void fd_trace_free(fd_trace *trace);

/* Monte Carlo sweeps. */
typedef void (*fd_progress_fn)(uint64_t done, uint64_t total, void *user);

FD_API fd_status fd_sweep_config_default(fd_sweep_config **out);
FD_API fd_status fd_sweep_config_load(const char *path, fd_sweep_config **out);
FD_API fd_status fd_sweep_config_set_seed(fd_sweep_config *cfg, uint64_t seed);
/* "full", "stratified:N" or "lhs:N" */
FD_API fd_status fd_sweep_config_set_subsample(fd_sweep_config *cfg, const char *subsample);
FD_API fd_status fd_sweep_config_set_tests_per_cell(fd_sweep_config *cfg, int tests);
FD_API fd_status fd_sweep_config_emit(const fd_sweep_config *cfg, char **yaml);
FD_API void fd_sweep_config_free(fd_sweep_config *cfg);

/* workers <= 0 uses every available core. cells_csv and dataset_csv may be
   NULL; both are written in cell order. */
FD_API fd_status fd_sweep_run(const fd_sweep_config *cfg, int workers, const char *cells_csv,
                              const char *dataset_csv, fd_progress_fn progress, void *user, fd_sweep **out);
FD_API fd_status fd_sweep_counts(const fd_sweep *sweep, uint64_t *cells, uint64_t *runs, uint64_t *discarded);
FD_API fd_status fd_sweep_summary_json(const fd_sweep *sweep, char **json);
FD_API fd_status fd_sweep_write_summary(const fd_sweep *sweep, const char *path);
FD_API fd_status fd_sweep_write_report(const fd_sweep *sweep, const char *path);
FD_API void fd_sweep_free(fd_sweep *sweep);

/* Rule mining. */
FD_API fd_status fd_rules_config_default(fd_rules_config **out);
FD_API fd_status fd_rules_config_load(const char *path, fd_rules_config **out);
FD_API fd_status fd_rules_config_emit(const fd_rules_config *cfg, char **yaml);
FD_API void fd_rules_config_free(fd_rules_config *cfg);

FD_API fd_status fd_dataset_load(const char *csv, const fd_rules_config *cfg, fd_dataset **out);
FD_API fd_status fd_dataset_shape(const fd_dataset *data, size_t *rows, size_t *features);
FD_API void fd_dataset_free(fd_dataset *data);

FD_API fd_status fd_tree_train(const fd_dataset *data, const fd_rules_config *cfg, fd_tree **out);
FD_API fd_status fd_tree_rule_count(const fd_tree *tree, size_t *count);
/* Any path may be NULL. */
FD_API fd_status fd_tree_write(const fd_tree *tree, const char *tree_json, const char *rules_json,
                               const char *tree_text, const char *report);
FD_API void fd_tree_free(fd_tree *tree);

#ifdef __cplusplus
}
#endif

#endif
