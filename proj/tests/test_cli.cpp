#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>
#include <unistd.h>

#include <json.hpp>

#include "cbleak/cli.hpp"
#include "cbleak/experiments.hpp"
#include "cbleak/synthgen.hpp"

using namespace cbleak;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("cbleak");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return cli_dispatch(static_cast<int>(argv.size()), argv.data());
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("cbleak-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("help and version exit cleanly; bad arguments exit 1") {
    CHECK(run_cli({"--help"}) == 0);
    for (const char* sub : {"generate", "measure", "sweep", "cbm-sweep", "plot"}) {
        CHECK(run_cli({sub, "--help"}) == 0);
    }
    CHECK(run_cli({"--version"}) == 0);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"generate"}) == 1);                          // missing --out
    CHECK(run_cli({"generate", "--bogus", "1"}) == 1);          // unknown flag
    CHECK(run_cli({}) == 1);                                    // no subcommand
    CHECK(run_cli({"measure", "--in", "/nonexistent.cblk"}) == 1);
    CHECK(run_cli({"plot", "--in", "/nonexistent.csv", "--out", "/tmp/x.svg"}) == 1);
}

TEST_CASE("generate is byte-reproducible and writes a manifest") {
    TempDir tmp;
    const std::vector<std::string> flags{"--n", "200", "--d", "20", "--k", "4",
                                         "--b", "10",  "--noise", "0.5", "--seed", "7"};
    std::vector<std::string> a{"generate", "--out", tmp.file("a.cblk")};
    a.insert(a.end(), flags.begin(), flags.end());
    std::vector<std::string> b{"generate", "--out", tmp.file("b.cblk")};
    b.insert(b.end(), flags.begin(), flags.end());
    REQUIRE(run_cli(a) == 0);
    REQUIRE(run_cli(b) == 0);
    CHECK(read_file(tmp.file("a.cblk")) == read_file(tmp.file("b.cblk")));

    const auto manifest = nlohmann::json::parse(read_file(tmp.file("a.cblk") + ".manifest.json"));
    CHECK(manifest["subcommand"] == "generate");
    CHECK(manifest["base_seed"] == 7);
    CHECK(manifest["config"]["n"] == 200);
    // --noise is a variance; the stored sigma is its square root
    CHECK(manifest["config"]["sigma_chat"].get<double>() ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("config file feeds generate and flags override it") {
    TempDir tmp;
    {
        std::ofstream cfg(tmp.file("gen.cfg"));
        cfg << "# dataset shape\nn = 150\nd = 24\nk = 4\nb = 12\nseed = 5\n";
    }
    REQUIRE(run_cli({"generate", "--config", tmp.file("gen.cfg"), "--out", tmp.file("c.cblk"),
                     "--n", "180"}) == 0);
    const auto manifest = nlohmann::json::parse(read_file(tmp.file("c.cblk") + ".manifest.json"));
    CHECK(manifest["config"]["n"] == 180);  // flag wins
    CHECK(manifest["config"]["d"] == 24);   // file wins over default
    CHECK(manifest["config"]["seed"] == 5);

    {
        std::ofstream cfg(tmp.file("bad.cfg"));
        cfg << "nonsense without equals\n";
    }
    CHECK(run_cli({"generate", "--config", tmp.file("bad.cfg"), "--out", tmp.file("d.cblk")}) == 1);
}

TEST_CASE("measure on a b = d dataset prints near-zero leakage and exits 0") {
    TempDir tmp;
    REQUIRE(run_cli({"generate", "--out", tmp.file("zero.cblk"), "--n", "2000", "--d", "40", "--k",
                     "5", "--b", "40", "--l", "0", "--noise", "0.5", "--seed", "11"}) == 0);
    REQUIRE(run_cli({"measure", "--in", tmp.file("zero.cblk"), "--classifier", "gbt", "--seed",
                     "3", "--out", tmp.file("zero.csv"), "--no-timing"}) == 0);

    const CsvTable table = read_csv(tmp.file("zero.csv"));
    REQUIRE(table.rows.size() == 1);
    const double leakage = std::stod(table.rows[0][table.column("leakage")]);
    CHECK(std::abs(leakage) <= 0.15);

    // runtime failures exit 2: a 5-row dataset cannot be split 70/15/15
    REQUIRE(run_cli({"generate", "--out", tmp.file("tiny.cblk"), "--n", "5", "--d", "8", "--k",
                     "2", "--b", "4"}) == 0);
    CHECK(run_cli({"measure", "--in", tmp.file("tiny.cblk")}) == 2);
}

TEST_CASE("sweep output is deterministic with --no-timing and carries the manifest summary") {
    TempDir tmp;
    const std::vector<std::string> base{
        "sweep",   "--n",     "300", "--d",    "40",  "--k",    "5",  "--noise", "0.5",
        "--classifier", "gbt", "--levels", "3",  "--runs", "2",   "--seed", "9",  "--jobs",  "2",
        "--no-timing"};
    std::vector<std::string> a = base;
    a.push_back("--out");
    a.push_back(tmp.file("a.csv"));
    std::vector<std::string> b = base;
    b.push_back("--out");
    b.push_back(tmp.file("b.csv"));
    REQUIRE(run_cli(a) == 0);
    REQUIRE(run_cli(b) == 0);
    CHECK(read_file(tmp.file("a.csv")) == read_file(tmp.file("b.csv")));

    const CsvTable table = read_csv(tmp.file("a.csv"));
    CHECK(table.rows.size() == 6);

    const auto manifest = nlohmann::json::parse(read_file(tmp.file("a.csv") + ".manifest.json"));
    CHECK(manifest["summary"]["rows"] == 6);
    REQUIRE(manifest["summary"].contains("negative_leakage_rows"));

    // every row flagged negative in the manifest is negative in the CSV, and vice versa
    std::set<std::size_t> flagged;
    for (const auto& idx : manifest["summary"]["negative_leakage_rows"]) {
        flagged.insert(idx.get<std::size_t>());
    }
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const double leakage = std::stod(table.rows[i][table.column("leakage")]);
        CHECK(flagged.contains(i) == (leakage < 0.0));
    }
}

TEST_CASE("sweep config file with flag overrides") {
    TempDir tmp;
    {
        std::ofstream cfg(tmp.file("sweep.cfg"));
        cfg << "n = 300\nd = 40\nk = 5\nnoise = 0.5\nclassifiers = gbt\nlevels = 2\nruns = 1\n"
            << "seed = 4\n";
    }
    REQUIRE(run_cli({"sweep", "--config", tmp.file("sweep.cfg"), "--out", tmp.file("s.csv"),
                     "--runs", "2", "--no-timing"}) == 0);
    const CsvTable table = read_csv(tmp.file("s.csv"));
    CHECK(table.rows.size() == 4);  // 2 levels x 2 runs (flag overrode runs=1)

    CHECK(run_cli({"sweep", "--config", tmp.file("nonexistent.cfg"), "--out",
                   tmp.file("t.csv")}) == 1);
}

TEST_CASE("cbm-sweep emits the lambda grid rows") {
    TempDir tmp;
    REQUIRE(run_cli({"cbm-sweep", "--out", tmp.file("cbm.csv"), "--n", "300", "--d", "30", "--k",
                     "4", "--b", "12", "--lambda-grid", "0.1,1", "--runs", "1", "--seed", "21",
                     "--jobs", "2"}) == 0);
    const CsvTable table = read_csv(tmp.file("cbm.csv"));
    CHECK(table.header ==
          std::vector<std::string>{"lambda", "k", "run", "h_y_c", "h_y_chat_c", "leakage",
                                   "acc_ga", "acc_gb"});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][0] == "0.1");
    CHECK(table.rows[1][0] == "1");

    const auto manifest = nlohmann::json::parse(read_file(tmp.file("cbm.csv") + ".manifest.json"));
    CHECK(manifest["subcommand"] == "cbm-sweep");
    CHECK(manifest["summary"]["rows"] == 2);
}

TEST_CASE("plot renders panels deterministically") {
    TempDir tmp;
    {
        std::ofstream csv(tmp.file("rows.csv"));
        csv << sweep_csv_header() << "\n";
        csv << "0,300,40,5,5,0.5,10,0,gbt,0,1.2,0.9,0.3,0.5,0.4,0\n";
        csv << "0,300,40,5,5,0.5,10,0,gbt,1,1.1,0.9,0.2,0.5,0.4,0\n";
        csv << "0,300,40,5,5,0.5,20,0,gbt,0,1.0,0.9,0.1,0.5,0.4,0\n";
        csv << "0,300,40,5,5,0.5,20,0,gbt,1,1.0,0.95,0.05,0.5,0.4,0\n";
        csv << "0,300,40,5,5,0.5,10,0,mlp,0,1.2,1.0,0.2,0.5,0.4,0\n";
        csv << "0,300,40,5,5,0.5,20,0,mlp,0,1.1,1.05,0.05,0.5,0.4,0\n";
    }
    REQUIRE(run_cli({"plot", "--in", tmp.file("rows.csv"), "--out", tmp.file("p.svg")}) == 0);
    const std::string svg = read_file(tmp.file("p.svg"));
    std::size_t polylines = 0;
    std::size_t pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        pos += 9;
    }
    CHECK(polylines == 2);  // one per classifier

    REQUIRE(run_cli({"plot", "--in", tmp.file("rows.csv"), "--out", tmp.file("q.svg")}) == 0);
    CHECK(read_file(tmp.file("p.svg")) == read_file(tmp.file("q.svg")));

    const auto manifest = nlohmann::json::parse(read_file(tmp.file("p.svg") + ".manifest.json"));
    CHECK(manifest["outputs"].size() == 1);
}

TEST_CASE("plot splits multiple configurations into panel files") {
    TempDir tmp;
    {
        std::ofstream csv(tmp.file("rows.csv"));
        csv << sweep_csv_header() << "\n";
        csv << "0,300,40,5,5,0.5,10,0,gbt,0,1.2,0.9,0.3,0.5,0.4,0\n";
        csv << "0,300,40,5,5,0.5,20,0,gbt,0,1.0,0.9,0.1,0.5,0.4,0\n";
        csv << "1,600,40,5,5,0.5,10,0,gbt,0,1.2,1.0,0.2,0.5,0.4,0\n";
        csv << "1,600,40,5,5,0.5,20,0,gbt,0,1.1,1.05,0.05,0.5,0.4,0\n";
    }
    REQUIRE(run_cli({"plot", "--in", tmp.file("rows.csv"), "--out", tmp.file("fig.svg")}) == 0);
    CHECK(fs::exists(tmp.file("fig_n300_d40_k5_noise0.5.svg")));
    CHECK(fs::exists(tmp.file("fig_n600_d40_k5_noise0.5.svg")));
}

TEST_CASE("CBLEAK_SEED supplies the default seed") {
    TempDir tmp;
    ::setenv("CBLEAK_SEED", "123", 1);
    REQUIRE(run_cli({"generate", "--out", tmp.file("env.cblk"), "--n", "100", "--d", "10", "--k",
                     "2", "--b", "5"}) == 0);
    ::unsetenv("CBLEAK_SEED");
    const auto manifest = nlohmann::json::parse(read_file(tmp.file("env.cblk") + ".manifest.json"));
    CHECK(manifest["config"]["seed"] == 123);
}

TEST_CASE("dataset round-trip through the CLI is bit-exact") {
    TempDir tmp;
    REQUIRE(run_cli({"generate", "--out", tmp.file("r.cblk"), "--n", "120", "--d", "16", "--k",
                     "3", "--b", "8", "--seed", "2"}) == 0);
    // loading and re-saving reproduces the file byte for byte
    const Dataset ds = load_dataset(tmp.file("r.cblk"));
    save_dataset(ds, tmp.file("r2.cblk"));
    CHECK(read_file(tmp.file("r.cblk")) == read_file(tmp.file("r2.cblk")));
}
