#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args, bool merge_stderr = false) {
    std::string cmd = std::string("\"") + RISKMENU_CLI + "\" " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string config(const std::string& name) { return std::string(RISKMENU_CONFIGS) + "/" + name; }

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("riskmenu_cli_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string write(const std::string& name, const std::string& body) const {
        const auto p = path_ / name;
        std::ofstream(p) << body;
        return p.string();
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
    static inline int counter_ = 0;
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::string menu_config(int n) {
    return R"({"market": {"r": 0.0, "mu": 1.0, "sigma": 1.0, "T": 1.0},
              "distribution": {"type": "uniform", "a": 1, "b": 10},
              "planner": {"eta": 1}, "solver": {"n": )" +
           std::to_string(n) + "}}";
}

} // namespace

TEST(Cli, SolveSingleUniformLog) {
    const auto r = run_cli("solve-single --config " + config("uniform_log.json"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto doc = json::parse(r.output);
    EXPECT_NEAR(doc.at("m_star").get<double>(), 1.0 / 5.5, 1e-12);
    EXPECT_NEAR(doc.at("gamma_star").get<double>(), 5.5, 1e-12);
    EXPECT_EQ(doc.at("meta").at("version"), "0.1.0");
}

TEST(Cli, SolveSinglePointMass) {
    const auto r = run_cli("solve-single --config " + config("point_mass.json"));
    ASSERT_EQ(r.exit_code, 0);
    const auto doc = json::parse(r.output);
    const auto cfg = json::parse(std::ifstream(config("point_mass.json")));
    const double x = cfg.at("distribution").at("x").get<double>();
    const auto& m = cfg.at("market");
    const double merton = (m.at("mu").get<double>() - m.at("r").get<double>()) /
                          (m.at("sigma").get<double>() * m.at("sigma").get<double>() * x);
    EXPECT_NEAR(doc.at("m_star").get<double>(), merton, 1e-12);
}

TEST(Cli, SolveMenuMatchesGeometricPartition) {
    TempDir dir;
    for (int n = 1; n <= 3; ++n) {
        const auto path = dir.write("menu" + std::to_string(n) + ".json", menu_config(n));
        const auto r = run_cli("solve-menu --config " + path + " --format csv");
        ASSERT_EQ(r.exit_code, 0) << r.output;
        const auto rows = csv_rows(r.output);
        ASSERT_GE(rows.size(), static_cast<std::size_t>(n + 3));
        EXPECT_EQ(rows[0], (std::vector<std::string>{"i", "g_lo", "g_hi", "Gamma_i", "m_i"}));
        for (int i = 1; i <= n; ++i) {
            const double lo = std::pow(10.0, (i - 1.0) / n), hi = std::pow(10.0, static_cast<double>(i) / n);
            EXPECT_NEAR(std::stod(rows[i][1]), lo, 1e-9);
            EXPECT_NEAR(std::stod(rows[i][2]), hi, 1e-9);
            // Cell mean of a uniform law.
            EXPECT_NEAR(std::stod(rows[i][3]), 0.5 * (lo + hi), 1e-9);
            EXPECT_NEAR(std::stod(rows[i][4]), 2.0 / (lo + hi), 1e-9);
        }
        if (n == 1) {
            const auto single = json::parse(run_cli("solve-single --config " + path).output);
            EXPECT_NEAR(std::stod(rows[1][4]), single.at("m_star").get<double>(), 1e-11);
        }
    }
}

TEST(Cli, SolveMenuTwoCellValues) {
    const auto rows = csv_rows(run_cli("solve-menu --config " + config("uniform_log.json")).output);
    EXPECT_NEAR(std::stod(rows[1][2]), 3.16228, 1e-5);
    EXPECT_NEAR(std::stod(rows[1][3]), 2.08114, 1e-5);
    EXPECT_NEAR(std::stod(rows[2][3]), 6.58114, 1e-5);
}

TEST(Cli, RobustMenuValues) {
    const auto r = run_cli("robust-menu --config " + config("uniform_log.json") + " --format json");
    ASSERT_EQ(r.exit_code, 0);
    const auto doc = json::parse(r.output);
    const auto& rows = doc.at("rows");
    ASSERT_EQ(rows.size(), 3u);
    const double s = std::sqrt(10.0);
    const double h1 = (1.0 + s) / 2.0;
    EXPECT_NEAR(rows[1].at("Gamma_i").get<double>(), 10.0 / (s * h1), 1e-10);
    EXPECT_NEAR(rows[1].at("Gamma_i").get<double>(), 1.51949, 1e-5);
    EXPECT_NEAR(rows[2].at("Gamma_i").get<double>(), 4.80506, 1e-5);
    EXPECT_NEAR(rows[1].at("g_i").get<double>(), 2.30886, 1e-5);
    const double gap = 1.0 - 1.0 / s;
    EXPECT_NEAR(doc.at("R_star").get<double>(), -gap * gap / 8.0, 1e-12);
}

TEST(Cli, BoundsFactor) {
    const auto rows = csv_rows(run_cli("bounds --config " + config("bounds.json")).output);
    ASSERT_GE(rows.size(), 3u);
    std::size_t col = 0;
    while (col < rows[0].size() && rows[0][col] != "bound_factor") ++col;
    ASSERT_LT(col, rows[0].size());
    EXPECT_NEAR(std::stod(rows[1][col]), 3.025, 1e-12);
    EXPECT_NEAR(std::stod(rows[2][col]), 1.36962635655, 1e-10);
}

TEST(Cli, MinMenuSizeAndStatics) {
    const auto mm = run_cli("min-menu-size --config " + config("bounds.json"));
    ASSERT_EQ(mm.exit_code, 0);
    for (const auto& row : csv_rows(mm.output)) {
        if (row.size() != 4 || row[0] == "b_over_a") continue;
        const double ratio = std::stod(row[0]), R = std::stod(row[1]);
        EXPECT_NEAR(std::stod(row[2]), std::log(ratio) / std::log(4.0 * R - 3.0), 1e-9);
    }
    const auto cs = run_cli("comparative-statics --config " + config("statics.json"));
    ASSERT_EQ(cs.exit_code, 0);
    const auto rows = csv_rows(cs.output);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"b_over_a", "i", "r_i", "rho_i"}));
    EXPECT_NEAR(std::stod(rows[1][2]), 0.25, 1e-6);
    EXPECT_NEAR(std::stod(rows[1][3]), 0.125, 1e-6);
}

TEST(Cli, SimulateZeroExposureIsRiskless) {
    const auto r = run_cli("simulate --config " + config("simulate.json") + " --m 0 --paths 1000");
    ASSERT_EQ(r.exit_code, 0);
    const auto doc = json::parse(r.output);
    const auto cfg = json::parse(std::ifstream(config("simulate.json")));
    const double rT = cfg.at("market").at("r").get<double>() * cfg.at("market").at("T").get<double>();
    for (const auto& row : doc.at("gammas")) {
        EXPECT_NEAR(row.at("sample_ce").get<double>(), std::exp(rT), 1e-12);
        EXPECT_EQ(row.at("z_score").get<double>(), 0.0);
    }
}

TEST(Cli, ReduceMarketTangency) {
    const auto r = run_cli("reduce-market --config " + config("multi_asset.json"));
    ASSERT_EQ(r.exit_code, 0);
    const auto doc = json::parse(r.output);
    const double k = doc.at("k").get<double>();
    EXPECT_NEAR(doc.at("market").at("sigma").get<double>(), std::sqrt(k), 1e-14);
    EXPECT_NEAR(doc.at("market").at("mu").get<double>() - doc.at("market").at("r").get<double>(), k, 1e-14);
}

TEST(Cli, ByteIdenticalRepeats) {
    for (const std::string cmd : {"solve-menu --config " + config("uniform_log.json"),
                                  "robust-menu --config " + config("uniform_log.json"),
                                  "simulate --config " + config("simulate.json") + " --paths 20000 --seed 5"}) {
        const auto a = run_cli(cmd), b = run_cli(cmd);
        ASSERT_EQ(a.exit_code, 0) << cmd;
        EXPECT_EQ(a.output, b.output) << cmd;
    }
}

TEST(Cli, SeedChangesSimulationAndHash) {
    const std::string base = "simulate --config " + config("simulate.json") + " --paths 20000 --format csv";
    const auto a = run_cli(base + " --seed 1"), b = run_cli(base + " --seed 2");
    EXPECT_NE(a.output, b.output);
    EXPECT_NE(a.output.substr(a.output.rfind("config_hash=")), b.output.substr(b.output.rfind("config_hash=")));
}

TEST(Cli, CsvHeaderAndTrailer) {
    const auto r = run_cli("solve-menu --config " + config("uniform_log.json") + " --format csv");
    const auto rows = csv_rows(r.output);
    ASSERT_GE(rows.size(), 2u);
    EXPECT_EQ(rows[0][0], "i");
    std::istringstream in(r.output);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    EXPECT_EQ(last.rfind("# version=0.1.0 config_hash=", 0), 0u) << last;
    EXPECT_EQ(last.size(), std::string("# version=0.1.0 config_hash=").size() + 16);
}

TEST(Cli, OutFileMatchesStdout) {
    TempDir dir;
    const auto out = dir.file("out.csv");
    const std::string cmd = "robust-menu --config " + config("uniform_log.json");
    ASSERT_EQ(run_cli(cmd + " --out " + out).exit_code, 0);
    std::ifstream in(out);
    const std::string written((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(written, run_cli(cmd).output);
}

TEST(Cli, ConfigErrorsExitTwoAndNameField) {
    TempDir dir;
    const auto bad_sigma = dir.write("sigma.json", R"({"market": {"r": 0, "mu": 1, "sigma": 0, "T": 1},
        "distribution": {"type": "point", "x": 2}})");
    auto r = run_cli("solve-single --config " + bad_sigma, true);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.output.find("market.sigma"), std::string::npos) << r.output;

    const auto unknown = dir.write("unknown.json", R"({"market": {"r": 0, "mu": 1, "sigma": 1, "T": 1, "rho": 3},
        "distribution": {"type": "point", "x": 2}})");
    r = run_cli("solve-single --config " + unknown, true);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.output.find("market.rho"), std::string::npos) << r.output;

    const auto bad_dist = dir.write("dist.json", R"({"market": {"r": 0, "mu": 1, "sigma": 1, "T": 1},
        "distribution": {"type": "uniform", "a": 5, "b": 2}})");
    r = run_cli("solve-single --config " + bad_dist, true);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.output.find("distribution"), std::string::npos) << r.output;

    const auto malformed = dir.write("malformed.json", "{ not json");
    EXPECT_EQ(run_cli("solve-single --config " + malformed).exit_code, 2);
    EXPECT_EQ(run_cli("solve-single --config " + dir.file("missing.json")).exit_code, 2);
    EXPECT_EQ(run_cli("solve-single").exit_code, 2);
    EXPECT_EQ(run_cli("solve-single --config " + config("uniform_log.json") + " --format xml").exit_code, 2);
}

TEST(Cli, NumericalFailureExitsThree) {
    TempDir dir;
    const auto singular = dir.write("singular.json", R"({"market": {"r": 0.01, "mu": [0.05, 0.06],
        "sigma": [[1.0, 0.0], [1.0, 1e-9]], "T": 1.0}})");
    const auto r = run_cli("reduce-market --config " + singular, true);
    EXPECT_EQ(r.exit_code, 3) << r.output;
}
