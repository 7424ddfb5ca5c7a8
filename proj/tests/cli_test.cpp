#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using test_support::xml_well_formed;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// Scratch dir per test case, removed on destruction.
struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() /
              ("metaeval_cli_test_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    fs::path path(const std::string& name) const { return dir / name; }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

RunResult run_cli(const Workspace& ws, const std::string& args) {
    const fs::path out_file = ws.path("stdout.txt");
    const fs::path err_file = ws.path("stderr.txt");
    const std::string cmd = std::string(METAEVAL_CLI_PATH) + " " + args + " > " +
                            out_file.string() + " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

// metric judged-subset means [1,3,2], full-test means [1,2,3]; human [1,2,3]
const char* kMetricModesCsv =
    "system_id,doc_id,score\n"
    "A,d1,1\nA,d2,1\nA,d3,1\nA,d4,1\n"
    "B,d1,3\nB,d2,3\nB,d3,1\nB,d4,1\n"
    "C,d1,2\nC,d2,2\nC,d3,4\nC,d4,4\n";
const char* kHumanModesCsv =
    "system_id,doc_id,score\n"
    "A,d1,1\nA,d2,1\nB,d1,2\nB,d2,2\nC,d1,3\nC,d2,3\n";

// metric means [10.0, 10.3, 12.0, 15.0]; human means [1, 2, 3, 4]
const char* kMetricGapsCsv =
    "system_id,doc_id,score\ns1,d1,10.0\ns2,d1,10.3\ns3,d1,12.0\ns4,d1,15.0\n";
const char* kHumanGapsCsv =
    "system_id,doc_id,score\ns1,d1,1\ns2,d1,2\ns3,d1,3\ns4,d1,4\n";

}  // namespace

TEST_CASE("correlate") {
    Workspace ws;
    spit(ws.path("metric.csv"), kMetricModesCsv);
    spit(ws.path("human.csv"), kHumanModesCsv);

    SUBCASE("identical files give coefficient 1.0 in either mode") {
        for (const char* mode : {"judged-only", "full-test"}) {
            const auto r = run_cli(ws, "correlate --metric " + ws.path("human.csv").string() +
                                           " --human " + ws.path("human.csv").string() +
                                           " --mode " + mode);
            REQUIRE(r.exit_code == 0);
            const auto j = json::parse(r.out);
            CHECK(j["coefficient"].get<double>() == 1.0);
            CHECK(j["mode"].get<std::string>() == mode);
        }
    }
    SUBCASE("judged-only and full-test disagree on the constructed fixture") {
        const std::string base = "correlate --metric " + ws.path("metric.csv").string() +
                                 " --human " + ws.path("human.csv").string();
        const auto judged = run_cli(ws, base + " --mode judged-only");
        const auto full = run_cli(ws, base + " --mode full-test");
        REQUIRE(judged.exit_code == 0);
        REQUIRE(full.exit_code == 0);
        const double tau_judged = json::parse(judged.out)["coefficient"].get<double>();
        const double tau_full = json::parse(full.out)["coefficient"].get<double>();
        CHECK(tau_judged == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(tau_full == 1.0);
    }
    SUBCASE("missing file exits 2 and names the path") {
        const auto r = run_cli(ws, "correlate --metric " + ws.path("nope.csv").string() +
                                       " --human " + ws.path("human.csv").string());
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("nope.csv") != std::string::npos);
    }
    SUBCASE("fully tied aggregates exit 3") {
        spit(ws.path("flat.csv"), "system_id,doc_id,score\nA,d1,7\nB,d1,7\n");
        spit(ws.path("h2.csv"), "system_id,doc_id,score\nA,d1,1\nB,d1,2\n");
        const auto r = run_cli(ws, "correlate --metric " + ws.path("flat.csv").string() +
                                       " --human " + ws.path("h2.csv").string());
        CHECK(r.exit_code == 3);
    }
    SUBCASE("--out writes the JSON and a manifest") {
        const auto r = run_cli(ws, "correlate --metric " + ws.path("metric.csv").string() +
                                       " --human " + ws.path("human.csv").string() + " --out " +
                                       ws.path("result.json").string());
        REQUIRE(r.exit_code == 0);
        CHECK(json::parse(slurp(ws.path("result.json")))["coefficient"].is_number());
        const auto manifest = json::parse(slurp(ws.path("result.json.manifest.json")));
        CHECK(manifest["command"].get<std::string>().find("correlate") != std::string::npos);
        CHECK(manifest["inputs"].size() == 2);
        CHECK(manifest["tool_version"].is_string());
        CHECK(manifest["timestamp"].is_string());
        CHECK(manifest["seed"].is_null());
    }
}

TEST_CASE("delta") {
    Workspace ws;
    spit(ws.path("metric.csv"), kMetricGapsCsv);
    spit(ws.path("human.csv"), kHumanGapsCsv);
    const std::string base = "delta --metric " + ws.path("metric.csv").string() + " --human " +
                             ws.path("human.csv").string();

    SUBCASE("default survey window selects one concordant pair") {
        const auto r = run_cli(ws, base + " --window 0:0.49");
        REQUIRE(r.exit_code == 0);
        const auto j = json::parse(r.out);
        CHECK(j["coefficient"].get<double>() == 1.0);
        CHECK(j["pairs_used"].get<int>() == 1);
        CHECK(j["mode"].get<std::string>() == "delta-window");
    }
    SUBCASE("grid mode writes the 55-cell CSV, JSON, SVG and manifest") {
        // 16 systems: every 10% rank band of the 120 pairs is nonempty
        std::string metric16 = "system_id,doc_id,score\n";
        std::string human16 = "system_id,doc_id,score\n";
        for (int i = 0; i < 16; ++i) {
            metric16 += "sys" + std::to_string(i) + ",d1," +
                        std::to_string(0.37 * i * i + 0.11 * i) + "\n";
            human16 += "sys" + std::to_string(i) + ",d1," + std::to_string((i * 7) % 16) + "\n";
        }
        spit(ws.path("metric16.csv"), metric16);
        spit(ws.path("human16.csv"), human16);
        const auto r = run_cli(ws, "delta --metric " + ws.path("metric16.csv").string() +
                                       " --human " + ws.path("human16.csv").string() +
                                       " --grid --fractions 0.1:1.0:0.1 --out-prefix " +
                                       ws.path("grid").string());
        REQUIRE(r.exit_code == 0);
        const auto csv = slurp(ws.path("grid.csv"));
        CHECK(test_support::count_occurrences(csv, "\n") == 56);  // header + 55 cells
        const auto j = json::parse(slurp(ws.path("grid.json")));
        CHECK(j["cells"].size() == 55);
        CHECK(xml_well_formed(slurp(ws.path("grid.svg"))));
        CHECK(json::parse(slurp(ws.path("grid.manifest.json")))["inputs"].size() == 2);
    }
    SUBCASE("a grid band with no pairs exits 3") {
        // only 6 pairs here, so a 10%-wide rank band can select nothing
        const auto r = run_cli(ws, base + " --grid --fractions 0.1:1.0:0.1 --out-prefix " +
                                       ws.path("small").string());
        CHECK(r.exit_code == 3);
    }
    SUBCASE("reversed bounds exit 2") {
        const auto r = run_cli(ws, base + " --window 5:1");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("empty selection exits 3 and echoes the window") {
        const auto r = run_cli(ws, base + " --window 0.31:0.4");
        CHECK(r.exit_code == 3);
        CHECK(r.err.find("0.31") != std::string::npos);
    }
    SUBCASE("repeatable windows produce an array") {
        const auto r = run_cli(ws, base + " --window 0:0.49 --window 0:inf");
        REQUIRE(r.exit_code == 0);
        const auto j = json::parse(r.out);
        REQUIRE(j.is_array());
        CHECK(j.size() == 2);
        CHECK(j[1]["pairs_used"].get<int>() == 6);
    }
}

TEST_CASE("ci") {
    Workspace ws;
    spit(ws.path("human.csv"), kHumanModesCsv);
    spit(ws.path("metric.csv"), kMetricModesCsv);

    SUBCASE("identical inputs give the degenerate [1, 1] interval") {
        const auto r = run_cli(ws, "ci --metric " + ws.path("human.csv").string() + " --human " +
                                       ws.path("human.csv").string() +
                                       " --method boot-inputs --iterations 100 --seed 11");
        REQUIRE(r.exit_code == 0);
        const auto j = json::parse(r.out);
        CHECK(j["lower"].get<double>() == 1.0);
        CHECK(j["upper"].get<double>() == 1.0);
        CHECK(j["defined_iterations"].get<int>() == 100);
    }
    SUBCASE("same seed twice is byte-identical; plot is well-formed") {
        const std::string cmd = "ci --metric " + ws.path("metric.csv").string() + " --human " +
                                ws.path("human.csv").string() +
                                " --method boot-both --iterations 150 --seed 42 --out ";
        const auto a = run_cli(ws, cmd + ws.path("a.json").string() + " --plot " +
                                       ws.path("a.svg").string());
        const auto b = run_cli(ws, cmd + ws.path("b.json").string());
        REQUIRE(a.exit_code == 0);
        REQUIRE(b.exit_code == 0);
        CHECK(slurp(ws.path("a.json")) == slurp(ws.path("b.json")));
        CHECK(xml_well_formed(slurp(ws.path("a.svg"))));
        const auto manifest = json::parse(slurp(ws.path("a.json.manifest.json")));
        CHECK(manifest["seed"].get<std::uint64_t>() == 42);
    }
    SUBCASE("seed is mandatory") {
        const auto r = run_cli(ws, "ci --metric " + ws.path("metric.csv").string() + " --human " +
                                       ws.path("human.csv").string());
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("stability") {
    Workspace ws;
    // score(i, j) depends only on the system: rankings never move
    std::string ranked = "system_id,doc_id,score\n";
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 12; ++j)
            ranked += "sys" + std::to_string(i) + ",doc" + std::to_string(j) + "," +
                      std::to_string(i) + "\n";
    spit(ws.path("ranked.csv"), ranked);

    SUBCASE("system-constant fixture keeps mean_tau at 1.0") {
        const auto r = run_cli(ws, "stability --scores " + ws.path("ranked.csv").string() +
                                       " --sizes 3,6,12 --iterations 50 --seed 2");
        REQUIRE(r.exit_code == 0);
        std::istringstream lines(r.out);
        std::string line;
        std::getline(lines, line);
        CHECK(line == "M,mean_tau,std_tau,iterations,defined");
        int rows = 0;
        while (std::getline(lines, line)) {
            ++rows;
            CHECK(line.find(",1,0,50,50") != std::string::npos);
        }
        CHECK(rows == 3);
    }
    SUBCASE("oversized samples warn but run") {
        const auto r = run_cli(ws, "stability --scores " + ws.path("ranked.csv").string() +
                                       " --sizes 40 --iterations 20 --seed 2");
        CHECK(r.exit_code == 0);
        CHECK(r.err.find("warning") != std::string::npos);
    }
    SUBCASE("missing --sizes is a usage error") {
        const auto r = run_cli(ws, "stability --scores " + ws.path("ranked.csv").string() +
                                       " --seed 2");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("out-prefix writes CSV, JSON, SVG and manifest; reruns are identical") {
        const std::string cmd = "stability --scores " + ws.path("ranked.csv").string() +
                                " --sizes 3,9 --iterations 40 --seed 5 --out-prefix ";
        REQUIRE(run_cli(ws, cmd + ws.path("s1").string()).exit_code == 0);
        REQUIRE(run_cli(ws, cmd + ws.path("s2").string()).exit_code == 0);
        CHECK(slurp(ws.path("s1.csv")) == slurp(ws.path("s2.csv")));
        CHECK(slurp(ws.path("s1.json")) == slurp(ws.path("s2.json")));
        CHECK(xml_well_formed(slurp(ws.path("s1.svg"))));
        CHECK(json::parse(slurp(ws.path("s1.manifest.json")))["seed"].get<int>() == 5);
    }
}

TEST_CASE("variance") {
    Workspace ws;
    spit(ws.path("flat.csv"),
         "system_id,doc_id,score\nA,d1,2\nA,d2,2\nA,d3,2\nB,d1,2\nB,d2,2\nB,d3,2\n");

    SUBCASE("constant fixture reports zero variance at every size") {
        const auto r = run_cli(ws, "variance --scores " + ws.path("flat.csv").string() +
                                       " --sizes 2,3 --iterations 50 --seed 1");
        REQUIRE(r.exit_code == 0);
        const auto j = json::parse(r.out);
        for (const auto& entry : j["sizes"])
            for (const auto& [id, var] : entry["per_system_variance"].items())
                CHECK(var.get<double>() == 0.0);
        CHECK(j.contains("variance_reduction_pct"));
    }
    SUBCASE("single size prints no reduction") {
        const auto r = run_cli(ws, "variance --scores " + ws.path("flat.csv").string() +
                                       " --sizes 3 --iterations 50 --seed 1");
        REQUIRE(r.exit_code == 0);
        CHECK_FALSE(json::parse(r.out).contains("variance_reduction_pct"));
        CHECK(r.err.find("variance reduction") == std::string::npos);
    }
}

TEST_CASE("synth") {
    Workspace ws;
    const std::string base = "synth --systems 3 --docs 20 --judged 5 --spread 1 --seed 31"
                             " --out-metric " + ws.path("m.csv").string() +
                             " --out-human " + ws.path("h.csv").string();

    SUBCASE("writes both tables with the requested shapes") {
        REQUIRE(run_cli(ws, base).exit_code == 0);
        const auto metric = slurp(ws.path("m.csv"));
        const auto human = slurp(ws.path("h.csv"));
        CHECK(test_support::count_occurrences(metric, "\n") == 1 + 3 * 20);
        CHECK(test_support::count_occurrences(human, "\n") == 1 + 3 * 5);
        CHECK(json::parse(slurp(ws.path("m.csv.manifest.json")))["seed"].get<int>() == 31);
    }
    SUBCASE("same seed gives identical files") {
        REQUIRE(run_cli(ws, base).exit_code == 0);
        const auto first_m = slurp(ws.path("m.csv"));
        const auto first_h = slurp(ws.path("h.csv"));
        REQUIRE(run_cli(ws, base).exit_code == 0);
        CHECK(slurp(ws.path("m.csv")) == first_m);
        CHECK(slurp(ws.path("h.csv")) == first_h);
    }
    SUBCASE("noiseless pipeline ends at tau 1 through correlate") {
        REQUIRE(run_cli(ws, base + " --noise 0 --lambda 0").exit_code == 0);
        const auto r = run_cli(ws, "correlate --metric " + ws.path("m.csv").string() +
                                       " --human " + ws.path("h.csv").string() +
                                       " --mode full-test");
        REQUIRE(r.exit_code == 0);
        CHECK(json::parse(r.out)["coefficient"].get<double>() == 1.0);
    }
    SUBCASE("invalid config exits 2") {
        const auto r = run_cli(ws, "synth --systems 1 --docs 5 --judged 2 --seed 1 --out-metric " +
                                       ws.path("x.csv").string() + " --out-human " +
                                       ws.path("y.csv").string());
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("json input format is accepted") {
    Workspace ws;
    spit(ws.path("table.json"),
         R"({"label":"t","systems":["A","B"],"docs":["d1","d2"],"scores":[[1,2],[3,4]]})");
    const auto r = run_cli(ws, "correlate --metric " + ws.path("table.json").string() +
                                   " --human " + ws.path("table.json").string());
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.out)["coefficient"].get<double>() == 1.0);
}
