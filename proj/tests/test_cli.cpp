// End-to-end checks of the CLI binary: exit codes, JSON output, CSV artifacts,
// determinism. The binary path is injected by CMake.
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out_file =
        fs::temp_directory_path() / ("gamelat_cli_out_" + std::to_string(counter++) + ".txt");
    const std::string cmd = std::string(GAMELAT_CLI_PATH) + " " + args + " > " +
                            out_file.string() + " 2>/dev/null";
    const int raw = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    result.out = ss.str();
    fs::remove(out_file);
    return result;
}

std::string write_config(const json& j) {
    static int counter = 0;
    const fs::path path =
        fs::temp_directory_path() / ("gamelat_cfg_" + std::to_string(counter++) + ".json");
    std::ofstream os(path);
    os << j.dump();
    return path.string();
}

json call_config(double s0, int n) {
    return json{{"model", {{"kind", "truncated_cev"}}},
                {"payoff",
                 {{"kind", "game_call"},
                  {"strike", 100},
                  {"penalty", 12},
                  {"rate", 0.06},
                  {"maturity", 2.0}}},
                {"s0", s0},
                {"n", n}};
}

} // namespace

TEST(Cli, PriceImmediateExerciseRow) {
    const auto r = run_cli("price --config " + write_config(call_config(100.0, 400)));
    ASSERT_EQ(r.exit_code, 0) << r.out;
    const json out = json::parse(r.out);
    EXPECT_EQ(out.at("command"), "price");
    EXPECT_NEAR(out.at("value").get<double>(), 12.0, 1e-9);
    EXPECT_EQ(out.at("n"), 400);
    EXPECT_EQ(out.at("convention"), "undiscounted_strike");
    // effective config is echoed with defaults filled
    EXPECT_EQ(out.at("config").at("payoff").at("strike"), 100);
    EXPECT_TRUE(out.at("config").contains("seed"));
}

TEST(Cli, InlineJsonConfigAndOverrides) {
    const std::string inline_cfg = "'" + call_config(100.0, 200).dump() + "'";
    const auto r = run_cli("price --config " + inline_cfg + " --s0 110 --n 150");
    ASSERT_EQ(r.exit_code, 0) << r.out;
    const json out = json::parse(r.out);
    EXPECT_NEAR(out.at("value").get<double>(), 22.0, 1e-9);
    EXPECT_EQ(out.at("n"), 150);
}

TEST(Cli, ZeroPenaltyPriceIsImmediateValue) {
    json cfg = call_config(108.0, 100);
    cfg["payoff"]["penalty"] = 0;
    const auto r = run_cli("price --config " + write_config(cfg));
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_NEAR(json::parse(r.out).at("value").get<double>(), 8.0, 1e-12);
}

TEST(Cli, ConfigErrorsExitTwo) {
    json bad = call_config(100.0, 100);
    bad["payoff"]["strike"] = -5;
    EXPECT_EQ(run_cli("price --config " + write_config(bad)).exit_code, 2);

    json unknown = call_config(100.0, 100);
    unknown["mystery_knob"] = 1;
    EXPECT_EQ(run_cli("price --config " + write_config(unknown)).exit_code, 2);

    EXPECT_EQ(run_cli("price --config /nonexistent/path.json").exit_code, 2);
    EXPECT_EQ(run_cli("frobnicate").exit_code, 2);
}

TEST(Cli, OracleSizeLimitExitsTwo) {
    json cfg = call_config(100.0, 5);
    EXPECT_EQ(run_cli("oracle --config " + write_config(cfg)).exit_code, 2);
}

TEST(Cli, RerunsAreByteIdentical) {
    const std::string cfg = write_config(call_config(92.5, 300));
    const auto a = run_cli("price --config " + cfg);
    const auto b = run_cli("price --config " + cfg);
    ASSERT_EQ(a.exit_code, 0);
    // wall_time differs between runs; compare everything else
    json ja = json::parse(a.out), jb = json::parse(b.out);
    ja.erase("wall_time_ms");
    jb.erase("wall_time_ms");
    EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(Cli, RegionWritesCsvArtifacts) {
    const fs::path dir = fs::temp_directory_path() / "gamelat_region_test";
    fs::remove_all(dir);
    json cfg = call_config(100.0, 300);
    const auto r =
        run_cli("region --config " + write_config(cfg) + " --out " + dir.string());
    ASSERT_EQ(r.exit_code, 0);
    const json out = json::parse(r.out);
    EXPECT_GT(out.at("seller_last_active_t").get<double>(), 1.0);
    std::ifstream seller(dir / "region_seller.csv");
    ASSERT_TRUE(seller.good());
    std::string header;
    std::getline(seller, header);
    EXPECT_EQ(header, "side,t,s_lo,s_hi");
    std::string first_row;
    std::getline(seller, first_row);
    EXPECT_EQ(first_row.rfind("seller,", 0), 0u);
    fs::remove_all(dir);
}

TEST(Cli, AmericanSellerCsvIsEmpty) {
    const fs::path dir = fs::temp_directory_path() / "gamelat_region_american";
    fs::remove_all(dir);
    json cfg = call_config(100.0, 200);
    cfg["payoff"] = {{"kind", "american_call"},
                     {"strike", 100},
                     {"rate", 0.06},
                     {"maturity", 2.0}};
    const auto r =
        run_cli("region --config " + write_config(cfg) + " --out " + dir.string());
    ASSERT_EQ(r.exit_code, 0);
    std::ifstream seller(dir / "region_seller.csv");
    std::string text((std::istreambuf_iterator<char>(seller)),
                     std::istreambuf_iterator<char>());
    EXPECT_EQ(text, "side,t,s_lo,s_hi\n");
    fs::remove_all(dir);
}

TEST(Cli, ConvergeWritesSweepCsv) {
    const fs::path dir = fs::temp_directory_path() / "gamelat_converge_test";
    fs::remove_all(dir);
    json cfg = call_config(100.0, 100);
    cfg["n_list"] = {50, 100};
    cfg["s0_list"] = {100.0, 105.0};
    const auto r =
        run_cli("converge --config " + write_config(cfg) + " --out " + dir.string());
    ASSERT_EQ(r.exit_code, 0);
    std::ifstream sweep(dir / "sweep.csv");
    std::string header;
    std::getline(sweep, header);
    EXPECT_EQ(header, "s0,n,value,wall_time_ms");
    int lines = 0;
    std::string line;
    while (std::getline(sweep, line)) ++lines;
    EXPECT_EQ(lines, 4);
    EXPECT_TRUE(fs::exists(dir / "diffs.csv"));
    fs::remove_all(dir);
}

TEST(Cli, DumpSurfaceWritesValueGrid) {
    const fs::path dir = fs::temp_directory_path() / "gamelat_surface_dump";
    fs::remove_all(dir);
    const auto r = run_cli("price --config " + write_config(call_config(100.0, 4)) +
                           " --dump-surface --out " + dir.string());
    ASSERT_EQ(r.exit_code, 0);
    std::ifstream csv(dir / "surface.csv");
    ASSERT_TRUE(csv.good());
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "k,i,t,s,J,f,g,buyer_stop,seller_stop");
    int lines = 0;
    std::string line;
    while (std::getline(csv, line)) ++lines;
    EXPECT_EQ(lines, 25); // (n+1)^2 nodes
    fs::remove_all(dir);
}

TEST(Cli, DumpLatticeWritesDebugCsv) {
    const fs::path dir = fs::temp_directory_path() / "gamelat_lattice_dump";
    fs::remove_all(dir);
    const auto r = run_cli("price --config " + write_config(call_config(100.0, 5)) +
                           " --dump-lattice --out " + dir.string());
    ASSERT_EQ(r.exit_code, 0);
    std::ifstream csv(dir / "lattice.csv");
    ASSERT_TRUE(csv.good());
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "i,z,s,p_up,p_mid,p_down");
    int lines = 0;
    std::string line;
    while (std::getline(csv, line)) ++lines;
    EXPECT_EQ(lines, 11); // 2n+1 nodes
    fs::remove_all(dir);
}

TEST(Cli, OracleCommandAgreesWithSolver) {
    json cfg = call_config(100.0, 3);
    cfg["payoff"]["maturity"] = 0.5;
    const auto r = run_cli("oracle --config " + write_config(cfg));
    ASSERT_EQ(r.exit_code, 0);
    const json out = json::parse(r.out);
    const double solver = out.at("solver_value").get<double>();
    EXPECT_NEAR(out.at("oracle_infsup").get<double>(), solver, 1e-12);
    EXPECT_NEAR(out.at("oracle_supinf").get<double>(), solver, 1e-12);
}

TEST(Cli, VerifyEmbeddingEmitsStats) {
    json cfg = {{"model", {{"kind", "constant"}, {"sigma", 0.3}}},
                {"s0", 100.0},
                {"h", 0.01},
                {"m", 4000},
                {"seed", 11}};
    const auto r = run_cli("verify-embedding --config " + write_config(cfg));
    ASSERT_EQ(r.exit_code, 0) << r.out;
    const json out = json::parse(r.out);
    EXPECT_EQ(out.at("m"), 4000);
    EXPECT_LT(out.at("truncation_fraction").get<double>(), 0.01);
    const double up = out.at("freq").at("up").get<double>();
    const double target = out.at("target_p").at("up").get<double>();
    EXPECT_NEAR(up, target, 5.0 * out.at("se_freq").at("up").get<double>() + 1e-12);
    EXPECT_EQ(out.at("config").at("h"), 0.01);
}

TEST(Cli, McValueRootCancel) {
    json cfg = call_config(110.0, 100);
    cfg["m"] = 200;
    cfg["dt"] = 0.02;
    const auto r = run_cli("mc-value --config " + write_config(cfg));
    ASSERT_EQ(r.exit_code, 0) << r.out;
    const json out = json::parse(r.out);
    EXPECT_NEAR(out.at("mean").get<double>(), 22.0, 1e-12);
    EXPECT_EQ(out.at("std_error").get<double>(), 0.0);
    EXPECT_EQ(out.at("mode"), "both");
}
