#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = RINGSYNC_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = "'" + kCli + "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("ringsync_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string q(const fs::path& p) const { return "'" + p.string() + "'"; }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateTwistIsStationary) {
    const auto out = dir_ / "twist.csv";
    ASSERT_EQ(run("simulate --n 40 --twist 3 --t-end 5 --out " + q(out)), 0);
    const auto rows = read_csv(out);
    ASSERT_EQ(rows[0], (std::vector<std::string>{"t", "q", "energy_per_n", "max_abs_eta", "in_region"}));
    ASSERT_EQ(rows.size(), 52u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i][1], "3");
        EXPECT_NEAR(std::stod(rows[i][2]), 1.0 - std::cos(2.0 * 3.141592653589793 * 3.0 / 40.0), 1e-12);
        EXPECT_EQ(rows[i][4], "1");
    }
    EXPECT_EQ(rows.back()[0], "5");
}

TEST_F(Cli, SimulateRandomIsReproducibleAndSettles) {
    const auto a = dir_ / "a.csv", b = dir_ / "b.csv";
    ASSERT_EQ(run("simulate --n 60 --random --seed 4 --t-end 30 --out " + q(a)), 0);
    ASSERT_EQ(run("simulate --n 60 --random --seed 4 --t-end 30 --out " + q(b)), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    const auto rows = read_csv(a);
    std::size_t first_inside = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i][4] == "1" && first_inside == 0) first_inside = i;
    ASSERT_GT(first_inside, 0u);
    for (std::size_t i = first_inside; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i][4], "1");
        EXPECT_EQ(rows[i][1], rows[first_inside][1]);
    }
    for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_LE(std::stod(rows[i][2]), std::stod(rows[i - 1][2]) + 1e-12);
}

TEST_F(Cli, UsageErrorsExitWithTwo) {
    const auto out = dir_ / "x.csv";
    EXPECT_EQ(run("simulate --n 40 --out " + q(out)), 2);
    EXPECT_EQ(run("simulate --n 40 --twist 1 --random --out " + q(out)), 2);
    EXPECT_EQ(run("simulate --n 40 --twist 1"), 2);
    EXPECT_EQ(run("simulate --n 2 --twist 0 --out " + q(out)), 2);
    EXPECT_EQ(run("simulate --n 40 --twist 1 --h 0 --out " + q(out)), 2);
    EXPECT_EQ(run("qdist --samples abc"), 2);
    EXPECT_EQ(run("no-such-command"), 2);
    EXPECT_EQ(run("timing --n 2 --out-dir " + q(dir_)), 2);
}

TEST_F(Cli, ConfigErrorsExitWithTwoAndWriteNothing) {
    const auto empty = dir_ / "empty.json", unknown = dir_ / "unknown.json", other = dir_ / "other.json";
    std::ofstream(empty) << "";
    std::ofstream(unknown) << R"({"samples": 5, "colour": "red"})";
    std::ofstream(other) << R"({"campaign": "basin_census"})";
    const auto out = dir_ / "out";
    EXPECT_EQ(run("qdist --config " + q(empty) + " --out-dir " + q(out)), 2);
    EXPECT_EQ(run("qdist --config " + q(unknown) + " --out-dir " + q(out)), 2);
    EXPECT_EQ(run("qdist --config " + q(other) + " --out-dir " + q(out)), 2);
    EXPECT_EQ(run("qdist --config " + q(dir_ / "missing.json") + " --out-dir " + q(out)), 2);
    EXPECT_FALSE(fs::exists(out / "manifest.json"));
}

TEST_F(Cli, FailedRunLeavesNoPartialOutputs) {
    const auto cfg = dir_ / "euler.json";
    std::ofstream(cfg) << R"({"campaign": "euler_compare", "n": 20, "samples": 2, "h_list": [0.1, 0.07]})";
    EXPECT_EQ(run("euler --config " + q(cfg) + " --out-dir " + q(dir_ / "out")), 2);
    EXPECT_TRUE(!fs::exists(dir_ / "out") || fs::is_empty(dir_ / "out"));
}

TEST_F(Cli, TimingCampaignWritesManifestAndRows) {
    const auto cfg = dir_ / "timing.json";
    std::ofstream(cfg) << R"({"campaign": "timing_scan", "n_list": [40, 80, 160], "samples": 100, "seed": 3})";
    const auto out = dir_ / "out";
    ASSERT_EQ(run("timing --config " + q(cfg) + " --out-dir " + q(out)), 0);
    const auto rows = read_csv(out / "timing.csv");
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0][0], "n");
    EXPECT_EQ(rows[1][0], "40");
    EXPECT_EQ(rows[3][0], "160");

    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    EXPECT_EQ(manifest["campaign"], "timing_scan");
    EXPECT_EQ(manifest["seed"], 3);
    EXPECT_EQ(manifest["config"]["samples"], 100);
    EXPECT_EQ(manifest["integrator"]["scheme"], "rk4");
    EXPECT_EQ(manifest["integrator"]["adaptive"], false);
    EXPECT_TRUE(manifest.contains("version"));
    ASSERT_TRUE(manifest["outputs"].is_array());
    for (const auto& p : manifest["outputs"]) EXPECT_TRUE(fs::exists(p.get<std::string>())) << p;
    EXPECT_EQ(manifest["summary"]["order_violations"], 0);
}

TEST_F(Cli, FlagsOverrideConfigAndRerunsAreByteIdentical) {
    const auto cfg = dir_ / "census.json";
    std::ofstream(cfg) << R"({"campaign": "basin_census", "n": 20, "samples": 50})";
    const auto a = dir_ / "a", b = dir_ / "b";
    ASSERT_EQ(run("census --config " + q(cfg) + " --samples 300 --workers 1 --out-dir " + q(a)), 0);
    ASSERT_EQ(run("census --config " + q(cfg) + " --samples 300 --workers 3 --out-dir " + q(b)), 0);
    EXPECT_EQ(slurp(a / "census.csv"), slurp(b / "census.csv"));
    EXPECT_EQ(slurp(a / "census_fits.csv"), slurp(b / "census_fits.csv"));
    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    EXPECT_EQ(manifest["config"]["samples"], 300);
    EXPECT_EQ(manifest["config"]["n"], 20);
    EXPECT_EQ(manifest["summary"]["total"], 300);
}

TEST_F(Cli, EveryCampaignRunsAtSmallScale) {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"qdist --n 40 --samples 20", "qdist.csv"},
        {"corr --n 40 --samples 30", "corr.csv"},
        {"entry --n 40 --samples 10", "entry.csv"},
        {"energy --n 40 --samples 10 --t-end 2", "energy.csv"},
        {"euler --n 20 --samples 3", "euler.csv"},
    };
    for (const auto& [args, file] : cases) {
        const auto out = dir_ / file;
        ASSERT_EQ(run(args + " --out-dir " + q(out)), 0) << args;
        EXPECT_TRUE(fs::exists(out / file)) << args;
        EXPECT_TRUE(fs::exists(out / "manifest.json")) << args;
    }
}

TEST_F(Cli, HelpAndVersion) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run("simulate --help"), 0);
}
