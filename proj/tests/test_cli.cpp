#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
    const char* p = std::getenv("SDQ_CLI");
    REQUIRE(p != nullptr);
    return p;
}

int run_cli(const std::string& args, const std::string& stdout_file = "/dev/null") {
    std::string cmd = cli_path() + " " + args + " > " + stdout_file + " 2> /dev/null";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sdq_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int counter() {
        static int c = 0;
        return ++c;
    }
};

fs::path write_model(const TempDir& dir, const std::string& name, const std::string& body) {
    fs::path p = dir.path / name;
    std::ofstream out(p);
    out << body;
    return p;
}

const char* kSymmetric = R"({
  "k": 2,
  "lambda": [[0.0, 1.0], [1.0, 0.0]],
  "lambda0": [1.0, 1.0],
  "service": [{"kind": "exponential", "rate": 2.0},
              {"kind": "exponential", "rate": 2.0}]
})";

} // namespace

TEST_CASE("stability reports the verdict for the symmetric model") {
    TempDir dir;
    fs::path model = write_model(dir, "model.json", kSymmetric);
    fs::path out = dir.path / "stdout.json";
    int rc = run_cli("--output-dir " + dir.path.string() + " stability " + model.string(),
                     out.string());
    REQUIRE(rc == 0);
    json j = json::parse(slurp(out));
    CHECK(j["rho"].get<double>() == Catch::Approx(0.5).margin(1e-12));
    CHECK(j["verdict"] == "Stable");
    CHECK(j["drainCoefficients"][0].get<double>() == Catch::Approx(1.0).margin(1e-12));
    CHECK(fs::exists(dir.path / "stability.json"));
    json manifest = json::parse(slurp(dir.path / "stability_manifest.json"));
    CHECK(manifest["subcommand"] == "stability");
    CHECK(manifest["model"]["digest"].get<std::string>().rfind("fnv1a64:", 0) == 0);
}

TEST_CASE("validate rejects a negative rate with exit 1") {
    TempDir dir;
    fs::path model = write_model(dir, "bad.json", R"({
      "k": 1, "lambda": [[-0.5]], "lambda0": [1.0],
      "service": [{"kind": "exponential", "rate": 1.0}]
    })");
    fs::path out = dir.path / "stdout.json";
    int rc = run_cli("--output-dir " + dir.path.string() + " validate " + model.string(),
                     out.string());
    CHECK(rc == 1);
    json j = json::parse(slurp(out));
    CHECK_FALSE(j["ok"].get<bool>());
    CHECK(j["violations"].size() >= 1);
}

TEST_CASE("validate accepts the symmetric model") {
    TempDir dir;
    fs::path model = write_model(dir, "model.json", kSymmetric);
    CHECK(run_cli("--output-dir " + dir.path.string() + " validate " + model.string()) == 0);
}

TEST_CASE("malformed model file exits 1") {
    TempDir dir;
    fs::path model = write_model(dir, "broken.json", "{ not json");
    CHECK(run_cli("--output-dir " + dir.path.string() + " validate " + model.string()) == 1);
}

TEST_CASE("unknown flags exit with code 64") {
    TempDir dir;
    fs::path model = write_model(dir, "model.json", kSymmetric);
    CHECK(run_cli("stability --no-such-flag " + model.string()) == 64);
    CHECK(run_cli("no-such-subcommand") == 64);
}

TEST_CASE("lst emits a monotone transform grid") {
    TempDir dir;
    fs::path model = write_model(dir, "model.json", kSymmetric);
    int rc = run_cli("--output-dir " + dir.path.string() + " lst " + model.string() +
                     " --theta-min 1e-3 --theta-max 10 --points 24");
    REQUIRE(rc == 0);
    std::ifstream csv(dir.path / "lst.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "theta,g_1,g_2,residual");
    double prev_g1 = 2.0, prev_g2 = 2.0;
    std::string line;
    int rows = 0;
    while (std::getline(csv, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double theta, g1, g2, resid;
        ls >> theta >> g1 >> g2 >> resid;
        CHECK(g1 <= prev_g1 + 1e-12);
        CHECK(g2 <= prev_g2 + 1e-12);
        CHECK(resid <= 1e-11);
        prev_g1 = g1;
        prev_g2 = g2;
        ++rows;
    }
    CHECK(rows == 24);
    json j = json::parse(slurp(dir.path / "lst.json"));
    CHECK(j["meanBusyFromLst"][0].get<double>() == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("fluid writes breakpoints and both drain times") {
    TempDir dir;
    fs::path model = write_model(dir, "model.json", kSymmetric);
    int rc = run_cli("--output-dir " + dir.path.string() + " fluid " + model.string() +
                     " --q0 1,1 --policy priority --priority 1,2 --horizon 50");
    REQUIRE(rc == 0);
    json j = json::parse(slurp(dir.path / "fluid.json"));
    CHECK(j["drainTime"].get<double>() == Catch::Approx(2.0).margin(1e-9));
    CHECK(j["lyapunovDrainTime"].get<double>() == Catch::Approx(2.0).margin(1e-12));
    std::ifstream csv(dir.path / "fluid.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "t,Q_1,Q_2,Y");
}

TEST_CASE("simulate busy-period mode reports oracle deviations") {
    TempDir dir;
    fs::path model = write_model(dir, "model.json", kSymmetric);
    int rc = run_cli("--output-dir " + dir.path.string() + " simulate " + model.string() +
                     " --busy-periods 2000 --seed 42");
    REQUIRE(rc == 0);
    json j = json::parse(slurp(dir.path / "simulate.json"));
    REQUIRE(j["busyPeriods"].size() == 2);
    for (const auto& block : j["busyPeriods"]) {
        CHECK(block["meanBusyClosedForm"].get<double>() == Catch::Approx(1.0).margin(1e-12));
        CHECK(std::fabs(block["meanBusyDeviationInSE"].get<double>()) < 4.0);
    }
}

TEST_CASE("branching subcommand emits closed forms next to monte carlo") {
    TempDir dir;
    fs::path model = write_model(dir, "model.json", kSymmetric);
    int rc = run_cli("--output-dir " + dir.path.string() + " branching " + model.string() +
                     " --reps 2000 --seed 9");
    REQUIRE(rc == 0);
    json j = json::parse(slurp(dir.path / "branching.json"));
    CHECK(j["extinctFraction"][0].get<double>() == 1.0);
    CHECK(j["meanBusyClosedForm"][0].get<double>() == Catch::Approx(1.0).margin(1e-12));
    CHECK(j["beta"][1].get<double>() == Catch::Approx(1.0).margin(1e-12));
    CHECK(j["tail"].is_null()); // no heavy-tailed class in this model
}

TEST_CASE("identical invocations produce byte-identical outputs") {
    TempDir dir1, dir2;
    fs::path m1 = write_model(dir1, "model.json", kSymmetric);
    fs::path m2 = write_model(dir2, "model.json", kSymmetric);
    std::string args1 = "--output-dir " + dir1.path.string() + " branching " + m1.string() +
                        " --reps 500 --seed 77";
    // same flags except the output dir; model path differs but digest agrees
    std::string args2 = "--output-dir " + dir2.path.string() + " branching " + m2.string() +
                        " --reps 500 --seed 77";
    REQUIRE(run_cli(args1) == 0);
    REQUIRE(run_cli(args2) == 0);
    CHECK(slurp(dir1.path / "branching.json") == slurp(dir2.path / "branching.json"));

    // different seed changes the bytes
    std::string args3 = "--output-dir " + dir1.path.string() + " branching " + m1.string() +
                        " --reps 500 --seed 78";
    REQUIRE(run_cli(args3) == 0);
    CHECK(slurp(dir1.path / "branching.json") != slurp(dir2.path / "branching.json"));
}

TEST_CASE("tail subcommand on a heavy-tailed model") {
    TempDir dir;
    fs::path model = write_model(dir, "heavy.json", R"({
      "k": 1, "lambda": [[0.5]], "lambda0": [1.0],
      "service": [{"kind": "pareto", "shape": 2.0, "scale": 0.5}]
    })");
    int rc = run_cli("--output-dir " + dir.path.string() + " tail " + model.string() +
                     " --class 1 --reps 20000 --seed 12 --quantiles 0.5,0.99");
    REQUIRE(rc == 0);
    json j = json::parse(slurp(dir.path / "tail.json"));
    CHECK(j["d"].get<double>() == Catch::Approx(8.0).margin(1e-12));
    REQUIRE(j["points"].size() == 2);
    CHECK(j["points"][1]["ratio"].get<double>() > 0.0);
}

TEST_CASE("--format csv echoes the csv product on stdout") {
    TempDir dir;
    fs::path model = write_model(dir, "model.json", kSymmetric);
    fs::path out = dir.path / "stdout.csv";
    int rc = run_cli("--output-dir " + dir.path.string() + " --format csv lst " + model.string() +
                         " --points 8",
                     out.string());
    REQUIRE(rc == 0);
    std::string text = slurp(out);
    CHECK(text.rfind("theta,g_1,g_2,residual", 0) == 0);
    // file outputs are written regardless of the stdout format
    CHECK(text == slurp(dir.path / "lst.csv"));
}

TEST_CASE("numerical failures exit with code 2") {
    TempDir dir;
    // rho = 1.5: the transform fixed point refuses to run
    fs::path model = write_model(dir, "unstable.json", R"({
      "k": 1, "lambda": [[3.0]], "lambda0": [1.0],
      "service": [{"kind": "exponential", "rate": 2.0}]
    })");
    CHECK(run_cli("--output-dir " + dir.path.string() + " lst " + model.string()) == 2);
}
