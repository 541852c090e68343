#pragma once

#include "firedetect/dtree.hpp"
#include "firedetect/montecarlo.hpp"
#include "firedetect/simulator.hpp"
#include "firedetect/thermal.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace firedetect::io {

// Shortest round-trip decimal form.
std::string format_double(double v);

// Every file starts with "# schema: <name> v<version>".
std::string schema_line(const std::string &name, int version);

struct CsvTable {
    std::string schema; // "<name> v<version>", empty when the file has none
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string &name) const; // ValidationError when absent
};

CsvTable read_csv_table(std::istream &in);
std::vector<std::string> split_csv_line(const std::string &line);
// Columnar JSON: numbers, true/false and empty fields (null) are typed.
std::string csv_to_json(const CsvTable &table);

// ---- fire calibration ----

std::vector<thermal::TableSample> read_fire_table(std::istream &in);
std::vector<thermal::TableSample> read_fire_table_file(const std::string &path);
void write_fire_table(std::ostream &out, const std::vector<thermal::TableSample> &rows);

std::string calibration_to_json(const thermal::FireCalibration &cal);
thermal::FireCalibration calibration_from_json(const std::string &text);

struct ReproductionRow {
    thermal::TableSample sample;
    double model = 0.0;
    double residual = 0.0; // relative
    bool fitted = false;
};

struct Reproduction {
    std::vector<ReproductionRow> rows;
    double max_residual = 0.0;      // over every row
    double max_held_out = 0.0;      // over rows not used by the fit
};

// Fits f(d) from the rows whose t_f equals fit_t_f (every row when
// fit_t_f <= 0) and evaluates the model on all rows.
Reproduction reproduce_table(const std::vector<thermal::TableSample> &rows, double fit_t_f,
                             thermal::FireCalibration *fitted = nullptr);
void write_reproduction_csv(std::ostream &out, const Reproduction &r);

// ---- single runs ----

void write_trace_csv(std::ostream &out, const sim::RunTrace &trace);
// PMU streams after errors and faults: t_s, terminal (S or R), v and i phasors.
void write_measurement_csv(std::ostream &out, const sim::RunTrace &trace);
std::string summary_to_json(const sim::RunTrace &trace, const sim::RunSpec &spec);
sim::RunSummary summary_from_json(const std::string &text);
std::string trips_to_json(const std::vector<sim::TripEvent> &trips);
std::string trace_to_svg(const sim::RunTrace &trace, const std::string &title = {});

// ---- sweeps ----

void write_cells_header(std::ostream &out);
void write_cell_row(std::ostream &out, const mc::CellResult &cell);

// One row per run; "label" is fire presence, the remaining booleans are
// alternative labels for rule mining.
void write_dataset_header(std::ostream &out);
void write_dataset_rows(std::ostream &out, const mc::CellResult &cell, const mc::SweepConfig &cfg);

std::string sweep_summary_to_json(const mc::SweepResult &result, const mc::SweepConfig &cfg);
mc::SweepResult sweep_summary_from_json(const std::string &text);
std::string sweep_report(const mc::SweepResult &result, const mc::SweepConfig &cfg);

// ---- rules ----

std::string rules_report(const dtree::Tree &tree, const std::vector<dtree::Rule> &rules,
                         const std::string &label);

std::string read_file(const std::string &path);
void write_file(const std::string &path, const std::string &content);

} // namespace firedetect::io
