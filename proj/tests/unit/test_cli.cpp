#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int cli(const std::string &args) {
    const std::string cmd = std::string("\"") + FD_CLI + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const char *name) {
    const fs::path p = fs::current_path() / "cli_scratch" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string q(const fs::path &p) { return "\"" + p.string() + "\""; }

const std::string kData = FD_DATA_DIR;
const std::string kConfigs = FD_CONFIG_DIR;

} // namespace

TEST_CASE("calibrate-fire exit codes") {
    const fs::path dir = scratch("calibrate");
    CHECK(cli("calibrate-fire " + kData + "/table1.csv --out " + q(dir)) == 0);
    CHECK(fs::exists(dir / "calibration.json"));
    CHECK(fs::exists(dir / "table1_reproduction.csv"));

    const fs::path empty = dir / "empty.csv";
    std::ofstream(empty).close();
    CHECK(cli("calibrate-fire " + q(empty) + " --out " + q(dir)) == 2);

    const fs::path bad = dir / "bad.csv";
    std::ofstream(bad) << "d_m,t_f_s,delta_ta_c\n5,10,30.99\n5,ten,1\n";
    CHECK(cli("calibrate-fire " + q(bad) + " --out " + q(dir)) == 2);

    const fs::path inconsistent = dir / "inconsistent.csv";
    std::ofstream(inconsistent) << "d_m,t_f_s,delta_ta_c\n5,10,30.99\n5,30,80\n";
    CHECK(cli("calibrate-fire " + q(inconsistent) + " --fit-tf 10 --out " + q(dir)) == 2);
    CHECK(cli("calibrate-fire " + q(dir / "missing.csv") + " --out " + q(dir)) == 1);
}

TEST_CASE("usage and validation errors exit with 2") {
    const fs::path dir = scratch("usage");
    CHECK(cli("") != 0);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("simulate --bogus") == 2);
    const fs::path cfg = dir / "bad.yaml";
    std::ofstream(cfg) << "line: {foo: 1}\n";
    CHECK(cli("simulate --config " + q(cfg) + " --out " + q(dir)) == 2);
    CHECK(cli("print-defaults run") == 0);
    CHECK(cli("print-defaults nothing") == 2);
}

TEST_CASE("simulate is byte-for-byte deterministic per seed") {
    const fs::path a = scratch("sim_a");
    const fs::path b = scratch("sim_b");
    const fs::path c = scratch("sim_c");
    const std::string cfg = kConfigs + "/run_fire_noisy.yaml";
    REQUIRE(cli("simulate --config " + cfg + " --seed 5 --out " + q(a)) == 0);
    REQUIRE(cli("simulate --config " + cfg + " --seed 5 --out " + q(b)) == 0);
    REQUIRE(cli("simulate --config " + cfg + " --seed 6 --out " + q(c)) == 0);
    for (const char *f : {"trace.csv", "measurements.csv", "summary.json", "trips.json", "trace.svg"}) {
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(slurp(a / "trace.csv") != slurp(c / "trace.csv"));
}

TEST_CASE("json output format replaces the csv") {
    const fs::path dir = scratch("json");
    REQUIRE(cli("simulate --config " + kConfigs + "/run_no_fire.yaml --format json --no-plot --out " + q(dir)) == 0);
    CHECK(fs::exists(dir / "trace.json"));
    CHECK_FALSE(fs::exists(dir / "trace.csv"));
    CHECK_FALSE(fs::exists(dir / "trace.svg"));
}

TEST_CASE("sweep then train-rules") {
    const fs::path dir = scratch("sweep");
    REQUIRE(cli("sweep --subsample stratified:10 --tests-per-cell 3 --workers 2 --out " + q(dir)) == 0);
    for (const char *f : {"cells.csv", "dataset.csv", "summary.json", "report.md"}) {
        CHECK(fs::exists(dir / f));
    }
    const fs::path rules = scratch("rules");
    CHECK(cli("train-rules " + q(dir / "dataset.csv") + " --out " + q(rules)) == 0);
    CHECK(fs::exists(rules / "rules.json"));
    CHECK(fs::exists(rules / "tree.txt"));
    CHECK(slurp(rules / "rules_report.txt").find("2.87") != std::string::npos);

    const fs::path nolabel = rules / "nolabel.csv";
    std::ofstream(nolabel) << "a,b\n1,2\n";
    CHECK(cli("train-rules " + q(nolabel) + " --out " + q(rules)) == 2);
}

TEST_CASE("single-cell sweep matches a direct simulation count") {
    const fs::path dir = scratch("single");
    const fs::path cfg = dir / "one.yaml";
    std::ofstream(cfg) << "schema: firedetect.sweep v1\n"
                          "subsample: full\n"
                          "tests_per_cell: 4\n"
                          "grid:\n"
                          "  delta_ta: {lo: 0, hi: 225.5, intervals: 1}\n"
                          "  t_a: {lo: 10, hi: 40, intervals: 1}\n"
                          "  v_w: {lo: 0, hi: 6.5, intervals: 1}\n"
                          "  t_s: {lo: 10, hi: 100, intervals: 1}\n"
                          "  length_km: {lo: 0, hi: 20, intervals: 1}\n"
                          "  current: {lo: 0, hi: 1600, intervals: 1}\n"
                          "  pf_correction: {lo: 0, hi: 1, intervals: 1}\n"
                          "  v_err: {lo: 0, hi: 0.003, intervals: 1}\n"
                          "  i_err: {lo: 0, hi: 0.006, intervals: 1}\n";
    REQUIRE(cli("sweep --config " + q(cfg) + " --out " + q(dir)) == 0);
    const std::string summary = slurp(dir / "summary.json");
    CHECK(summary.find("\"cells\": 1") != std::string::npos);
    CHECK(summary.find("\"runs\": 4") != std::string::npos);
}
