// End-to-end checks of the citymine binary: argument handling, exit
// codes, and the file contracts of each subcommand. The binary path is
// injected by the build as CITYMINE_CLI_PATH.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include "citymine/embedding.hpp"
#include "citymine/geojson.hpp"
#include "citymine/pipeline.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out);
    out << content;
}

// Run the CLI with the working directory and std streams captured in `dir`.
RunResult run_cli(const fs::path& dir, const std::string& args, const std::string& env = "") {
    fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    std::string cmd = "cd '" + dir.string() + "' && " + (env.empty() ? "" : env + " ") + "'" +
                      std::string(CITYMINE_CLI_PATH) + "' " + args + " > '" + out.string() +
                      "' 2> '" + err.string() + "'";
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

} // namespace

TEST_CASE("mine consumes a raw transaction file with absolute support") {
    fixtures::TempDir tmp("cli-mine");
    std::string lines;
    for (const auto& t : fixtures::worked_example_transactions()) {
        for (std::size_t i = 0; i < t.size(); ++i) lines += (i ? " " : "") + t[i];
        lines += '\n';
    }
    write_text(tmp.path / "t.txt", lines);

    RunResult r = run_cli(tmp.path, "mine --transactions t.txt --minsup-abs 3 --out fis.csv");
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == "wrote fis.csv (9 itemsets)\n");
    CHECK(slurp(tmp.path / "fis.csv") ==
          "itemset,support,relative_support\n"
          "B,6,0.857143\n"
          "C,7,1.000000\n"
          "G,3,0.428571\n"
          "W,3,0.428571\n"
          "B C,6,0.857143\n"
          "B W,3,0.428571\n"
          "C G,3,0.428571\n"
          "C W,3,0.428571\n"
          "B C W,3,0.428571\n");

    // relative support path through --minsup
    RunResult rel = run_cli(tmp.path, "mine --transactions t.txt --minsup 0.99 --out top.csv");
    REQUIRE(rel.exit_code == 0);
    CHECK(slurp(tmp.path / "top.csv") == "itemset,support,relative_support\nC,7,1.000000\n");
}

TEST_CASE("argument errors exit with code 2") {
    fixtures::TempDir tmp("cli-args");
    CHECK(run_cli(tmp.path, "smelt").exit_code == 2);            // unknown subcommand
    CHECK(run_cli(tmp.path, "").exit_code == 2);                 // a subcommand is required
    CHECK(run_cli(tmp.path, "extract").exit_code == 2);          // missing --config
    CHECK(run_cli(tmp.path, "sweep --config x.json").exit_code == 2); // missing --distances
    CHECK(run_cli(tmp.path, "--help").exit_code == 0);
    CHECK(run_cli(tmp.path, "mine --help").exit_code == 0);

    RunResult both = run_cli(tmp.path, "mine --transactions a --config b");
    CHECK(both.exit_code == 2);
    CHECK(both.err.find("config error:") != std::string::npos);

    RunResult neither = run_cli(tmp.path, "mine");
    CHECK(neither.exit_code == 2);

    RunResult no_out = run_cli(tmp.path, "mine --transactions a.txt");
    CHECK(no_out.exit_code == 2);
    CHECK(no_out.err.find("--out") != std::string::npos);
}

TEST_CASE("data errors exit with code 3") {
    fixtures::TempDir tmp("cli-data");
    RunResult r = run_cli(tmp.path, "mine --transactions missing.txt --out fis.csv");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("data error:") != std::string::npos);

    write_text(tmp.path / "cfg.json",
               R"({"inputs": [{"city": "GHOST", "path": "ghost.geojson"}], "output_dir": "out"})");
    RunResult ghost = run_cli(tmp.path, "extract --config cfg.json");
    CHECK(ghost.exit_code == 3);
    CHECK(ghost.err.find("stage extract: city 'GHOST'") != std::string::npos);
}

TEST_CASE("config errors exit with code 2") {
    fixtures::TempDir tmp("cli-config");
    write_text(tmp.path / "bad.json", R"({"inputs": [], "mining": {}})");
    RunResult unknown = run_cli(tmp.path, "pipeline --config bad.json");
    CHECK(unknown.exit_code == 2);
    CHECK(unknown.err.find("config error: unknown config key 'mining'") != std::string::npos);

    write_text(tmp.path / "empty.json", R"({"inputs": []})");
    CHECK(run_cli(tmp.path, "pipeline --config empty.json").exit_code == 2);

    // override validation happens before any stage runs
    write_text(tmp.path / "one.json",
               R"({"inputs": [{"city": "A", "path": "a.geojson"}], "output_dir": "out"})");
    RunResult minsup = run_cli(tmp.path, "mine --config one.json --minsup 2.0");
    CHECK(minsup.exit_code == 2);
    CHECK(minsup.err.find("minsup_relative") != std::string::npos);
}

TEST_CASE("synth and pipeline run end to end") {
    fixtures::TempDir tmp("cli-pipeline");
    RunResult synth = run_cli(tmp.path, "synth --out-dir demo --seed 42");
    CAPTURE(synth.err);
    REQUIRE(synth.exit_code == 0);
    CHECK(synth.out.find("wrote demo bundle:") != std::string::npos);
    REQUIRE(fs::exists(tmp.path / "demo" / "config.json"));

    RunResult run = run_cli(tmp.path, "pipeline --config demo/config.json --jobs 2");
    CAPTURE(run.err);
    REQUIRE(run.exit_code == 0);
    CHECK(run.out.find("wrote 33 artifacts; manifest: ") != std::string::npos);
    REQUIRE(fs::exists(tmp.path / "demo" / "out" / "manifest.json"));

    nlohmann::json manifest = nlohmann::json::parse(slurp(tmp.path / "demo" / "out" / "manifest.json"));
    CHECK(manifest.size() == 33);

    // per-stage invocations agree with the one-shot pipeline byte for byte
    for (const char* stage : {"extract", "mine", "matrix", "embed", "cluster", "report"}) {
        RunResult s = run_cli(tmp.path, std::string(stage) + " --config demo/config.json --out-dir staged");
        CAPTURE(stage, s.err);
        REQUIRE(s.exit_code == 0);
    }
    for (const auto& entry : manifest) {
        auto name = entry["path"].get<std::string>();
        CHECK(citymine::sha256_file(tmp.path / "staged" / name) == entry["sha256"].get<std::string>());
    }
}

TEST_CASE("cluster works directly from an embedding CSV") {
    fixtures::TempDir tmp("cli-cluster");
    citymine::Embedding e;
    e.city_names = {"A", "B", "C", "D"};
    e.coords = {{0.0, 0.0}, {1.0, 0.0}, {10.0, 0.0}, {11.0, 0.0}};
    e.method = "pca";
    citymine::write_embedding_csv(e, tmp.path / "embedding.csv");

    RunResult r = run_cli(tmp.path, "cluster --embedding embedding.csv --out-dir cl");
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(tmp.path / "cl" / "assignment.json"));
    CHECK(fs::exists(tmp.path / "cl" / "dendrogram.json"));
    CHECK(fs::exists(tmp.path / "cl" / "kselection.csv"));
    CHECK(fs::exists(tmp.path / "cl" / "distances.csv"));

    // without --out-dir the CITYMINE_OUT_DIR environment variable wins
    RunResult env_run =
        run_cli(tmp.path, "cluster --embedding embedding.csv", "CITYMINE_OUT_DIR=envout");
    CAPTURE(env_run.err);
    REQUIRE(env_run.exit_code == 0);
    CHECK(fs::exists(tmp.path / "envout" / "assignment.json"));

    // --config and --embedding are mutually exclusive
    CHECK(run_cli(tmp.path, "cluster --embedding embedding.csv --config x.json").exit_code == 2);

    // an explicit cut distance overrides the automatic choice
    RunResult cut = run_cli(tmp.path, "cluster --embedding embedding.csv --out-dir cut --cut-distance 1.0");
    REQUIRE(cut.exit_code == 0);
    nlohmann::json a = nlohmann::json::parse(slurp(tmp.path / "cut" / "assignment.json"));
    CHECK(a["criterion"]["type"] == "cut_distance");
    CHECK(a["criterion"]["distance"].get<double>() == 1.0);
    CHECK(a["k"].get<int>() == 2);
}

TEST_CASE("sweep writes one row per distance") {
    fixtures::TempDir tmp("cli-sweep");
    citymine::write_feature_collection(
        fixtures::grid_layer("GRID", 4, 4, 10.0, 5.0, "11100", "21000"), tmp.path / "grid.geojson");
    write_text(tmp.path / "cfg.json",
               R"({"inputs": [{"city": "GRID", "path": "grid.geojson"}],
                   "code_attribute": "code", "output_dir": "out"})");

    RunResult r = run_cli(tmp.path, "sweep --config cfg.json --distances 4,6");
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("(2 rows)") != std::string::npos);
    std::string csv = slurp(tmp.path / "out" / "sweep.csv");
    CHECK(csv.find("4,16,1,1.000000,2\n") != std::string::npos);
    CHECK(csv.find("6,16,2,2.000000,3\n") != std::string::npos);
}
