#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/planewave.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "weylscat_test_cli";

struct command_result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream o(p, std::ios::binary);
    o << text;
}

command_result run_tool(const std::string& args) {
    const fs::path out = kWork / "cmd.out";
    const fs::path err = kWork / "cmd.err";
    const std::string cmd = std::string(WEYLSCAT_BIN) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    command_result r;
    r.exit_code = status >= 0 ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_skipped) {
            header_skipped = true;
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        for (char c : line) {
            if (c == ',') {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell += c;
            }
        }
        cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

const char* kF0Doc = R"({
  "interval": {"x_l": 0.0, "x_r": 3.141592653589793},
  "segments": [{"width": 3.141592653589793, "m": 0.5, "v": 0.0}],
  "leads": {
    "left": {"m": 0.5, "v": 0.0},
    "right": {"m": 0.5, "v": 0.0}
  },
  "grid": {"start": 0.05, "stop": 6.0, "count": 200},
  "options": {"n_series_terms": 200, "diagnostics": true}
})";

const char* kPoleDoc = R"({
  "interval": {"x_l": 0.0, "x_r": 3.141592653589793},
  "segments": [{"width": 3.141592653589793, "m": 0.5, "v": 0.0}],
  "leads": {
    "left": {"m": 0.5, "v": 0.0},
    "right": {"m": 0.5, "v": 0.0}
  },
  "grid": {"values": [0.25, 1.0, 2.25, 4.0]},
  "options": {"n_series_terms": 60}
})";

const char* kBarrierDoc = R"({
  "interval": {"x_l": 0.0, "x_r": 3.141592653589793},
  "segments": [{"width": 3.141592653589793, "m": 0.5, "v": 2.0}],
  "leads": {
    "left": {"m": 0.5, "v": 0.0},
    "right": {"m": 0.5, "v": 0.0}
  },
  "grid": {"values": [0.5, 1.0, 1.5]},
  "options": {"n_series_terms": 120}
})";

struct workspace {
    workspace() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
    }
};

}  // namespace

TEST_CASE("a sweep run writes four deterministic files") {
    workspace ws;
    spit(kWork / "f0.json", kF0Doc);

    const auto r1 = run_tool("run --config " + (kWork / "f0.json").string() +
                             " --out " + (kWork / "a").string() +
                             " --threads 1");
    REQUIRE(r1.exit_code == 0);
    for (const char* name :
         {"sweep.csv", "eigen.csv", "convergence.csv", "diagnostics.csv"})
        CHECK(fs::exists(kWork / "a" / name));

    const auto rows = csv_rows(kWork / "a" / "sweep.csv");
    REQUIRE(rows.size() == 200);
    for (const auto& row : rows) {
        REQUIRE(row.size() == 17);
        CHECK(row[2] == "none");
        CHECK(row[1] == "2");
        CHECK(!row[16].empty());
    }

    // The same configuration on a different worker count is byte-identical.
    const auto r2 = run_tool("run --config " + (kWork / "f0.json").string() +
                             " --out " + (kWork / "b").string() +
                             " --threads 2");
    REQUIRE(r2.exit_code == 0);
    for (const char* name :
         {"sweep.csv", "eigen.csv", "convergence.csv", "diagnostics.csv"})
        CHECK(slurp(kWork / "a" / name) == slurp(kWork / "b" / name));

    // The divergence report starts at the exact first partial sum 2/pi and
    // grows linearly in the cutoff.
    const auto diag = csv_rows(kWork / "a" / "diagnostics.csv");
    REQUIRE(diag.size() == 5);
    CHECK(std::stod(diag[0][2]) ==
          doctest::Approx(2.0 / 3.141592653589793).epsilon(1e-8));
    CHECK(std::stod(diag[4][2]) / std::stod(diag[3][2]) ==
          doctest::Approx(2.0).epsilon(0.1));

    // Convergence probes shrink with depth.
    const auto conv = csv_rows(kWork / "a" / "convergence.csv");
    REQUIRE(!conv.empty());
    CHECK(std::stod(conv[0][2]) > std::stod(conv[4][2]));
}

TEST_CASE("grid points on the decoupled spectrum are flagged") {
    workspace ws;
    spit(kWork / "pole.json", kPoleDoc);
    const auto r = run_tool("run --config " + (kWork / "pole.json").string() +
                            " --out " + (kWork / "p").string());
    REQUIRE(r.exit_code == 0);
    const auto rows = csv_rows(kWork / "p" / "sweep.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0][2] == "none");
    CHECK(rows[1][2] == "dirichlet_pole");
    CHECK(rows[2][2] == "none");
    CHECK(rows[3][2] == "dirichlet_pole");
    for (std::size_t i = 3; i < 17; ++i) {
        CHECK(rows[1][i].empty());
        CHECK(rows[3][i].empty());
    }
    // Excluded energies contribute no eigen-family rows.
    const auto eig = csv_rows(kWork / "p" / "eigen.csv");
    CHECK(eig.size() == 120u);
}

TEST_CASE("the transmission column reproduces the plane-wave barrier") {
    workspace ws;
    spit(kWork / "b1.json", kBarrierDoc);
    const auto r = run_tool("run --config " + (kWork / "b1.json").string() +
                            " --out " + (kWork / "t").string());
    REQUIRE(r.exit_code == 0);
    const auto rows = csv_rows(kWork / "t" / "sweep.csv");
    REQUIRE(rows.size() == 3);
    const double energies[] = {0.5, 1.0, 1.5};
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(rows[i][2] == "none");
        const double t_ref = testsupport::barrier_transmission(
            2.0, 3.141592653589793, energies[i]);
        CHECK(std::stod(rows[i][15]) ==
              doctest::Approx(t_ref).epsilon(1e-8));
    }
    CHECK(std::stod(rows[1][15]) == doctest::Approx(7.4422e-3).epsilon(1e-3));
}

TEST_CASE("config errors exit 2 and name the offending key") {
    workspace ws;
    spit(kWork / "bad.json", R"({"interval": {"x_l": 2.0, "x_r": 1.0}})");
    auto r = run_tool("run --config " + (kWork / "bad.json").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("interval: x_l must be < x_r") != std::string::npos);

    std::string doc = kF0Doc;
    doc.insert(doc.rfind('}'), ", \"extra\": 3");
    spit(kWork / "unknown.json", doc);
    r = run_tool("run --config " + (kWork / "unknown.json").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("unknown key \"extra\"") != std::string::npos);

    r = run_tool("run --config " + (kWork / "absent.json").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("cannot read file") != std::string::npos);
}

TEST_CASE("numerical failures exit 3 and leave no partial outputs") {
    workspace ws;
    std::string doc = kF0Doc;
    doc.replace(doc.find("\"v\": 0.0}]"), 10, "\"v\": 100000.0}]");
    spit(kWork / "deep.json", doc);
    const auto r = run_tool("run --config " + (kWork / "deep.json").string() +
                            " --out " + (kWork / "d").string() +
                            " --no-series");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("numerical failure") != std::string::npos);
    CHECK(!fs::exists(kWork / "d" / "sweep.csv"));
}

TEST_CASE("series flags override the configured comparison") {
    workspace ws;
    std::string doc = kF0Doc;
    doc.replace(doc.find("\"start\": 0.05, \"stop\": 6.0, \"count\": 200"), 40,
                "\"values\": [0.25, 2.25]");
    doc.replace(doc.find(", \"diagnostics\": true"), 21,
                ", \"compare_series\": false");
    spit(kWork / "small.json", doc);

    // The configured compare_series=false suppresses the series reports.
    auto r = run_tool("run --config " + (kWork / "small.json").string() +
                      " --out " + (kWork / "ns").string());
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(kWork / "ns" / "sweep.csv"));
    CHECK(!fs::exists(kWork / "ns" / "eigen.csv"));
    CHECK(!fs::exists(kWork / "ns" / "convergence.csv"));
    CHECK(!fs::exists(kWork / "ns" / "diagnostics.csv"));
    for (const auto& row : csv_rows(kWork / "ns" / "sweep.csv"))
        CHECK(row[16].empty());

    // --series wins over the configuration.
    r = run_tool("run --config " + (kWork / "small.json").string() +
                 " --out " + (kWork / "ws").string() + " --series");
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(kWork / "ws" / "eigen.csv"));
    CHECK(fs::exists(kWork / "ws" / "convergence.csv"));
    for (const auto& row : csv_rows(kWork / "ws" / "sweep.csv"))
        CHECK(!row[16].empty());
}

TEST_CASE("plotdata expands included rows and flags malformed input") {
    workspace ws;
    spit(kWork / "pole.json", kPoleDoc);
    REQUIRE(run_tool("run --config " + (kWork / "pole.json").string() +
                     " --out " + (kWork / "p").string())
                .exit_code == 0);

    auto r = run_tool("plotdata " + (kWork / "p" / "sweep.csv").string() +
                      " --out " + (kWork / "plots").string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.err.empty());

    std::ifstream t_dat(kWork / "plots" / "T.dat");
    REQUIRE(t_dat.good());
    std::string line;
    int data_lines = 0;
    while (std::getline(t_dat, line)) {
        if (line.empty() || line[0] == '#') continue;
        ++data_lines;
        CHECK(line.find("nan") == std::string::npos);
    }
    CHECK(data_lines == 2);

    // Every row excluded: files exist but are empty, and stderr warns.
    std::ostringstream all_excluded;
    all_excluded << "lambda,channels,exclusion,ReS11,ImS11,ReS12,ImS12,ReS21,"
                    "ImS21,ReS22,ImS22,R11,R12,R21,R22,T,series_error\n"
                 << "1,0,threshold,,,,,,,,,,,,,,\n";
    spit(kWork / "excluded.csv", all_excluded.str());
    r = run_tool("plotdata " + (kWork / "excluded.csv").string() + " --out " +
                 (kWork / "plots2").string());
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("excluded") != std::string::npos);
    std::ifstream t2(kWork / "plots2" / "T.dat");
    int t2_data = 0;
    while (std::getline(t2, line))
        if (!line.empty() && line[0] != '#') ++t2_data;
    CHECK(t2_data == 0);

    spit(kWork / "mangled.csv", "lambda,who\n0.5,1\n");
    r = run_tool("plotdata " + (kWork / "mangled.csv").string());
    CHECK(r.exit_code == 2);
}
