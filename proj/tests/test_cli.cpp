#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DPCA_CLI_PATH;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("dpca_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Path -> content for every regular file under root.
std::map<std::string, std::string> tree_snapshot(const fs::path& root) {
    std::map<std::string, std::string> snap;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            snap[fs::relative(entry.path(), root).string()] = slurp(entry.path());
        }
    }
    return snap;
}

} // namespace

TEST_CASE("pipeline smoke: synth data, default flags, full output tree") {
    TempDir dir("smoke");
    const std::string d = dir.path.string();
    REQUIRE(run("synth --out-dir " + d + " --days 90 --sites 3 --seed 3 --missing-rate 0.02") ==
            0);
    REQUIRE(run("pipeline --input " + d + "/observations.csv --out-dir " + d) == 0);

    for (const char* f :
         {"grid.csv", "grid_imputed.csv", "missingness.csv", "diagnostics.csv", "ev_surface.csv",
          "loadings.csv", "mac.csv", "mean_ev_by_hour.csv", "overall_mean_ev.csv",
          "ev_distribution_k1.csv", "panels/nsao_h00.csv", "panels/nsao_h23.csv",
          "pipeline_manifest.json", "dpca_manifest.json"}) {
        CHECK(fs::exists(dir.path / f));
    }

    // Every CSV artifact in the tree starts with a header row.
    int csv_files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir.path)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        ++csv_files;
        const std::string text = slurp(entry.path());
        CHECK(text.find(',') != std::string::npos);
        CHECK(std::isalpha(static_cast<unsigned char>(text[0])));
    }
    CHECK(csv_files > 80); // grid + 72 panels + reports
}

TEST_CASE("dpca --hour 7 restricts EV and loadings to hour 7") {
    TempDir dir("hour7");
    const std::string d = dir.path.string();
    REQUIRE(run("synth --out-dir " + d + " --days 80 --sites 2 --seed 4") == 0);
    REQUIRE(run("ingest --input " + d + "/observations.csv --out-dir " + d) == 0);
    REQUIRE(run("impute --out-dir " + d) == 0);
    REQUIRE(run("sao --out-dir " + d) == 0);
    REQUIRE(run("transform --out-dir " + d) == 0);
    REQUIRE(run("dpca --out-dir " + d + " --window 45 --hour 7") == 0);

    for (const char* f : {"ev_surface.csv", "loadings.csv", "mac.csv"}) {
        std::ifstream in(dir.path / f);
        std::string line;
        std::getline(in, line); // header
        int rows = 0;
        while (std::getline(in, line)) {
            CHECK(line.rfind("7,", 0) == 0);
            ++rows;
        }
        CHECK(rows > 0);
    }
}

TEST_CASE("rerun with identical config is byte-identical") {
    TempDir dir("rerun");
    const std::string d = dir.path.string();
    REQUIRE(run("synth --out-dir " + d + " --days 80 --sites 2 --seed 6 --missing-rate 0.01") ==
            0);
    const std::string input = d + "/observations.csv";
    const std::string pipe_args = "pipeline --input " + input + " --out-dir " + d;
    REQUIRE(run(pipe_args) == 0);
    const auto first = tree_snapshot(dir.path);
    REQUIRE(run(pipe_args) == 0);
    const auto second = tree_snapshot(dir.path);
    CHECK(first == second);
}

TEST_CASE("exit codes: config 2, data 3") {
    TempDir dir("codes");
    const std::string d = dir.path.string();
    CHECK(run("ingest --out-dir " + d) == 2);            // missing --input
    CHECK(run("synth --out-dir " + d + " --factors 9") == 2);
    CHECK(run("ingest --input " + d + "/nope.csv --out-dir " + d) == 3);
    CHECK(run("nonsense-subcommand") == 2);

    // Malformed data file -> 3.
    std::ofstream bad(dir.path / "bad.csv");
    bad << "timestamp,site_id,pollutant,value,qc_code\nnot-a-time,S1,O3,1,\n";
    bad.close();
    CHECK(run("ingest --input " + d + "/bad.csv --out-dir " + d) == 3);
}

TEST_CASE("exit code 4 when the whole run is numerically degenerate") {
    TempDir dir("degen");
    const std::string d = dir.path.string();
    // Constant concentrations: the pooled static PCA cannot standardize.
    std::ofstream csv(dir.path / "flat.csv");
    csv << "timestamp,site_id,pollutant,value,qc_code\n";
    for (int day = 1; day <= 28; ++day) {
        for (int h = 0; h < 24; ++h) {
            for (const char* p : {"O3", "CO", "NO2", "SO2", "PM2.5"}) {
                char buf[96];
                std::snprintf(buf, sizeof(buf), "2009-06-%02dT%02d:00:00-06:00,S1,%s,5,\n", day,
                              h, p);
                csv << buf;
            }
        }
    }
    csv.close();
    REQUIRE(run("ingest --input " + d + "/flat.csv --out-dir " + d) == 0);
    REQUIRE(run("impute --out-dir " + d) == 0);
    CHECK(run("compare-static --out-dir " + d) == 4);
}

TEST_CASE("config file values are read and flags win") {
    TempDir dir("config");
    const std::string d = dir.path.string();
    std::ofstream cfg(dir.path / "run.toml");
    cfg << "[synth]\ndays=70\nsites=2\nseed=11\nout-dir=\"" << d << "\"\n";
    cfg.close();
    REQUIRE(run("--config " + d + "/run.toml synth") == 0);
    CHECK(fs::exists(dir.path / "observations.csv"));

    // Count rows: 70 days x 24 x 2 sites x 5 pollutants + header.
    std::ifstream in(dir.path / "observations.csv");
    long lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 70L * 24 * 2 * 5 + 1);
}
