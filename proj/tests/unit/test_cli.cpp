#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "selrisk/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return SELRISK_CLI_PATH; }

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("selrisk_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int counter() {
        static int n = 0;
        return ++n;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kExamplePCsv =
    "p\n0.00473\n0.0155\n0.016\n0.0219\n0.0302\n0.0465\n0.136\n0.225\n0.437\n0.446\n0.484\n"
    "0.488\n0.566\n0.597\n0.691\n0.759\n0.775\n0.782\n0.844\n0.97\n";

}  // namespace

TEST_CASE("cli bh reproduces the worked example") {
    TempDir dir;
    write_file(dir.file("p.csv"), kExamplePCsv);
    REQUIRE(run_cli("bh --input " + dir.file("p.csv") + " --q 0.3 --output " +
                    dir.file("rej.csv")) == 0);

    const selrisk::CsvTable rej = selrisk::read_csv(dir.file("rej.csv"));
    const std::size_t col = rej.column("reject");
    std::size_t rejected = 0;
    for (std::size_t r = 0; r < rej.rows.size(); ++r) {
        rejected += (rej.rows[r][col] == "1");
        CHECK((r < 6) == (rej.rows[r][col] == "1"));
    }
    CHECK(rejected == 6);

    const json trace = json::parse(read_file(dir.file("rej.csv.trace.json")));
    CHECK(trace["schema_version"] == 1);
    CHECK(trace["selected_counts"] == json::array({20, 8, 6}));
    CHECK(trace["threshold"].get<double>() == 0.0465);
}

TEST_CASE("cli bh input validation") {
    TempDir dir;
    write_file(dir.file("empty.csv"), "");
    CHECK(run_cli("bh --input " + dir.file("empty.csv") + " --q 0.2 --output " +
                  dir.file("o.csv")) != 0);

    write_file(dir.file("header_only.csv"), "p\n");
    CHECK(run_cli("bh --input " + dir.file("header_only.csv") + " --q 0.2 --output " +
                  dir.file("o.csv")) != 0);

    write_file(dir.file("bad.csv"), "p\n0.5\n1.4\n");
    CHECK(run_cli("bh --input " + dir.file("bad.csv") + " --q 0.2 --output " + dir.file("o.csv")) !=
          0);

    write_file(dir.file("one.csv"), "p\n1\n");
    REQUIRE(run_cli("bh --input " + dir.file("one.csv") + " --q 0.2 --output " +
                    dir.file("one_out.csv")) == 0);
    const selrisk::CsvTable one = selrisk::read_csv(dir.file("one_out.csv"));
    CHECK(one.rows[0][one.column("reject")] == "0");
}

TEST_CASE("cli by-iterate emits per-iteration bounds") {
    TempDir dir;
    write_file(dir.file("x.csv"),
               "x\n-2.59\n-2.16\n-2.14\n-2.02\n-1.88\n-1.68\n-1.1\n-0.755\n-0.158\n-0.136\n"
               "-0.0408\n-0.0293\n0.167\n0.245\n0.499\n0.702\n0.755\n0.779\n1.01\n1.88\n");
    REQUIRE(run_cli("by-iterate --input " + dir.file("x.csv") + " --q 0.3 --output " +
                    dir.file("u.csv")) == 0);
    const selrisk::CsvTable table = selrisk::read_csv(dir.file("u.csv"));
    REQUIRE(table.header.size() == 3 + 3 + 1);  // task, x, p, u_1..u_3, selected
    CHECK(table.header[3] == "u_1");
    // Rank 1 bounds agree with the library to full precision.
    CHECK(selrisk::csv_double(table, 0, 3) ==
          doctest::Approx(-2.59 + 0.524400512708041).epsilon(1e-12));
    // Deselected tasks lose their bounds in later iterations.
    CHECK(table.rows[19][4].empty());
    CHECK(table.rows[0][6] == "1");
    CHECK(table.rows[7][6] == "0");

    write_file(dir.file("calm.csv"), "x\n10\n10\n10\n");
    REQUIRE(run_cli("by-iterate --input " + dir.file("calm.csv") + " --q 0.3 --output " +
                    dir.file("calm_u.csv")) == 0);
    const selrisk::CsvTable calm = selrisk::read_csv(dir.file("calm_u.csv"));
    CHECK(calm.header.size() == 3 + 1 + 1);  // single iteration
    for (const auto& row : calm.rows) CHECK(row[4] == "0");
}

TEST_CASE("cli fdr-curve single anchor matches bh, and emits the curve table") {
    TempDir dir;
    write_file(dir.file("x.csv"), "x\n-2.6\n-2.1\n-1.4\n-0.5\n0.3\n1.2\n");
    write_file(dir.file("curve.json"),
               R"({"schema_version":1,"family":"gaussian_shift",)"
               R"("anchors":[{"c":0.0,"q":0.3}],"grid":{"min":-2.0,"max":1.5,"points":8}})");
    REQUIRE(run_cli("fdr-curve --input " + dir.file("x.csv") + " --curve " +
                    dir.file("curve.json") + " --output " + dir.file("rej.csv")) == 0);

    // Build the matching p-value input and compare rejection columns.
    const selrisk::CsvTable rej = selrisk::read_csv(dir.file("rej.csv"));
    std::string pcsv = "p\n";
    {
        std::ifstream in(dir.file("x.csv"));
        std::string line;
        std::getline(in, line);
        double x;
        while (in >> x) {
            pcsv += selrisk::format_double(0.5 * std::erfc(-x / std::sqrt(2.0))) + "\n";
        }
    }
    write_file(dir.file("p.csv"), pcsv);
    REQUIRE(run_cli("bh --input " + dir.file("p.csv") + " --q 0.3 --output " +
                    dir.file("bh.csv")) == 0);
    const selrisk::CsvTable bh = selrisk::read_csv(dir.file("bh.csv"));
    for (std::size_t r = 0; r < rej.rows.size(); ++r) {
        CHECK(rej.rows[r][rej.column("reject")] == bh.rows[r][bh.column("reject")]);
    }

    const selrisk::CsvTable curve = selrisk::read_csv(dir.file("rej.csv") + ".curve.csv");
    CHECK(curve.header == std::vector<std::string>{"c", "q_bh", "q_star"});
    CHECK(curve.rows.size() >= 8);  // grid plus merged anchor
    for (std::size_t r = 0; r < curve.rows.size(); ++r) {
        CHECK(selrisk::csv_double(curve, r, 2) <= selrisk::csv_double(curve, r, 1) + 1e-15);
    }

    // Zero-level anchors are rejected.
    write_file(dir.file("zero.json"),
               R"({"schema_version":1,"anchors":[{"c":0.0,"q":0.0}],)"
               R"("grid":{"min":-1.0,"max":1.0,"points":5}})");
    CHECK(run_cli("fdr-curve --input " + dir.file("x.csv") + " --curve " + dir.file("zero.json") +
                  " --output " + dir.file("z.csv")) != 0);
}

TEST_CASE("cli extra-risk and multi-risk run configured suites") {
    TempDir dir;
    write_file(dir.file("p.csv"), "p\n0.001\n0.01\n0.3\n0.7\n0.9\n");
    write_file(dir.file("suite.json"),
               R"({"schema_version":1,"pairs":[{"kind":"threshold","q":0.2,"input":"p.csv"}]})");
    REQUIRE(run_cli("extra-risk --suite " + dir.file("suite.json") + " --output " +
                    dir.file("report.json")) == 0);
    const json report = json::parse(read_file(dir.file("report.json")));
    CHECK(report["selected_count"] == 2);
    CHECK(report["selected"] == json::array({1, 1, 0, 0, 0}));

    write_file(dir.file("groups.csv"),
               "task_id,p\ng1,0.001\ng1,0.4\ng2,0.03\ng2,0.05\ng3,0.7\ng3,0.9\n");
    write_file(dir.file("pc.csv"),
               "task_id,p\ng1,0.004\ng1,0.09\ng2,0.02\ng2,0.5\ng3,0.6\ng3,0.95\n");
    write_file(dir.file("multi.json"),
               R"({"schema_version":1,"pairs":[)"
               R"({"kind":"group_fwe","q":0.2,"method":"holm","input":"groups.csv"},)"
               R"({"kind":"partial_conjunction","q":0.25,"input":"pc.csv"}]})");
    REQUIRE(run_cli("multi-risk --suite " + dir.file("multi.json") +
                    " --mode parallel --output " + dir.file("par.json")) == 0);
    REQUIRE(run_cli("multi-risk --suite " + dir.file("multi.json") +
                    " --mode sequential --output " + dir.file("seq.json")) == 0);
    const json par = json::parse(read_file(dir.file("par.json")));
    const json seq = json::parse(read_file(dir.file("seq.json")));
    CHECK(par["selected"] == seq["selected"]);
    CHECK(par["terminal_decisions"] == seq["terminal_decisions"]);
    CHECK(par["task_labels"] == json::array({"g1", "g2", "g3"}));

    // Balance and directional kinds load from their CSV shapes.
    write_file(dir.file("pcat.csv"),
               "p,category\n0.001,1\n0.002,1\n0.003,1\n0.004,2\n0.9,2\n");
    write_file(dir.file("balance.json"),
               R"({"schema_version":1,"pairs":[)"
               R"({"kind":"balance","q":0.3,"gamma":2.0,"input":"pcat.csv"}]})");
    REQUIRE(run_cli("extra-risk --suite " + dir.file("balance.json") + " --output " +
                    dir.file("bal.json")) == 0);
    const json bal = json::parse(read_file(dir.file("bal.json")));
    CHECK(bal["selected_count"] == 3);  // two smallest of category 1 plus one of category 2

    write_file(dir.file("dir.json"),
               R"({"schema_version":1,"pairs":[)"
               R"({"kind":"directional","q":0.2,"input":"p.csv"}]})");
    REQUIRE(run_cli("extra-risk --suite " + dir.file("dir.json") + " --output " +
                    dir.file("dir_out.json")) == 0);
    const json dir_report = json::parse(read_file(dir.file("dir_out.json")));
    CHECK(dir_report["terminal_decisions"][0] == "-");

    // Pair task counts must agree.
    write_file(dir.file("short.csv"), "p\n0.5\n0.6\n");
    write_file(dir.file("bad.json"),
               R"({"schema_version":1,"pairs":[)"
               R"({"kind":"threshold","q":0.2,"input":"p.csv"},)"
               R"({"kind":"threshold","q":0.2,"input":"short.csv"}]})");
    CHECK(run_cli("multi-risk --suite " + dir.file("bad.json") + " --output " +
                  dir.file("bad_out.json")) != 0);
}

TEST_CASE("cli perm-bh is byte-deterministic and validates groups") {
    TempDir dir;
    std::string csv = "task_id,group,value\n";
    for (int t = 1; t <= 6; ++t) {
        for (int i = 0; i < 4; ++i) {
            csv += "t" + std::to_string(t) + ",A," +
                   std::to_string(0.1 * t + 0.31 * i + (t <= 2 ? 2.0 : 0.0)) + "\n";
            csv += "t" + std::to_string(t) + ",B," + std::to_string(0.07 * t + 0.23 * i) + "\n";
        }
    }
    write_file(dir.file("obs.csv"), csv);

    REQUIRE(run_cli("perm-bh --input " + dir.file("obs.csv") +
                    " --q 0.2 --seed 31 --output " + dir.file("r1.json")) == 0);
    REQUIRE(run_cli("perm-bh --input " + dir.file("obs.csv") +
                    " --q 0.2 --seed 31 --output " + dir.file("r2.json")) == 0);
    CHECK(read_file(dir.file("r1.json")) == read_file(dir.file("r2.json")));

    const json report = json::parse(read_file(dir.file("r1.json")));
    CHECK(report["mode"] == "scheduled");
    CHECK(report["schedule"].contains("constant"));
    CHECK(report["total_permutations"].get<std::size_t>() > 0);

    REQUIRE(run_cli("perm-bh --input " + dir.file("obs.csv") +
                    " --q 0.2 --fixed-m 50 --seed 31 --output " + dir.file("fixed.json")) == 0);
    const json fixed = json::parse(read_file(dir.file("fixed.json")));
    CHECK(fixed["mode"] == "fixed");
    CHECK(fixed["total_permutations"] == 6 * 50);

    // Seed is mandatory.
    CHECK(run_cli("perm-bh --input " + dir.file("obs.csv") + " --q 0.2 --output " +
                  dir.file("r3.json")) != 0);

    // A third group label is rejected.
    write_file(dir.file("bad.csv"), "task_id,group,value\nt1,A,1\nt1,B,2\nt1,C,3\n");
    CHECK(run_cli("perm-bh --input " + dir.file("bad.csv") + " --q 0.2 --seed 1 --output " +
                  dir.file("bad.json")) != 0);

    // Each task needs both groups.
    write_file(dir.file("onegroup.csv"), "task_id,group,value\nt1,A,1\nt1,A,2\nt2,A,1\nt2,B,2\n");
    CHECK(run_cli("perm-bh --input " + dir.file("onegroup.csv") + " --q 0.2 --seed 1 --output " +
                  dir.file("one.json")) != 0);
}

TEST_CASE("cli simulate runs scenarios and validates schemas") {
    TempDir dir;
    write_file(dir.file("scenario.json"),
               R"({"schema_version":1,"procedure":"bh_fdr","q":0.1,"reps":200,)"
               R"("theta":[{"value":0.0,"count":20},{"value":-2.0,"count":20}]})");
    REQUIRE(run_cli("simulate --scenario " + dir.file("scenario.json") +
                    " --seed 5 --output " + dir.file("out.json")) == 0);
    const json out = json::parse(read_file(dir.file("out.json")));
    CHECK(out["results"]["risk"]["replications"] == 200);
    CHECK(out["results"].contains("verdict"));

    // reps = 0 is a schema error.
    write_file(dir.file("zero.json"),
               R"({"schema_version":1,"procedure":"bh_fdr","q":0.1,"reps":0,)"
               R"("theta":[{"value":0.0,"count":5}]})");
    CHECK(run_cli("simulate --scenario " + dir.file("zero.json") + " --seed 5 --output " +
                  dir.file("o.json")) != 0);

    // Unknown procedures list the valid names.
    write_file(dir.file("unknown.json"),
               R"({"schema_version":1,"procedure":"mystery","reps":10})");
    const std::string cmd = std::string(cli_path()) + " simulate --scenario " +
                            dir.file("unknown.json") + " --seed 5 --output " + dir.file("u.json") +
                            " 2>" + dir.file("err.txt");
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) != 0);
    const std::string err = read_file(dir.file("err.txt"));
    CHECK(err.find("bh_fdr") != std::string::npos);
    CHECK(err.find("perm_fdr") != std::string::npos);
}

TEST_CASE("cli simulate runs the bundled scenario") {
    TempDir dir;
    REQUIRE(run_cli("simulate --scenario " SELRISK_SCENARIO_DIR "/bh_fdr_m100.json --seed 11 "
                    "--output " +
                    dir.file("bundled.json")) == 0);
    const json out = json::parse(read_file(dir.file("bundled.json")));
    CHECK(out["results"]["risk"]["replications"] == 2000);
    CHECK(out["results"]["risk"].contains("estimate"));
    CHECK(out["results"]["verdict"] == true);
}

TEST_CASE("cli round trip: rejection CSVs re-ingest to identical masks") {
    TempDir dir;
    write_file(dir.file("p.csv"), kExamplePCsv);
    REQUIRE(run_cli("bh --input " + dir.file("p.csv") + " --q 0.3 --output " +
                    dir.file("rej.csv")) == 0);
    write_file(dir.file("check.json"),
               R"({"schema_version":1,"procedure":"bh_recheck","q":0.3,)"
               R"("pvalues_csv":"p.csv","rejections_csv":"rej.csv"})");
    REQUIRE(run_cli("simulate --scenario " + dir.file("check.json") + " --seed 1 --output " +
                    dir.file("verdict.json")) == 0);
    const json verdict = json::parse(read_file(dir.file("verdict.json")));
    CHECK(verdict["results"]["match"] == true);
}
