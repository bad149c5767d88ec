// Batch front-end: parses a JSON run config, dispatches to the library and
// emits JSON on stdout plus CSV artifacts. Exit codes: 0 ok, 2 config error,
// 3 numerical error.
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gamelat/gamelat.hpp"

namespace {

using nlohmann::json;

struct CommonArgs {
    std::string config;
    std::string out_dir = ".";
    int threads = -1; // -1 = not given
    std::optional<std::uint64_t> seed;
    std::optional<double> s0;
    std::optional<int> n;
    std::optional<std::size_t> m;
    std::optional<double> dt;
    bool dump_lattice = false;
    bool dump_surface = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config,
                    "run config: path to a JSON file, or an inline JSON object");
    cmd->add_option("--out", args.out_dir, "directory for CSV artifacts");
    cmd->add_option("--threads", args.threads, "cap on worker threads");
    cmd->add_option("--seed", args.seed, "RNG seed override");
    cmd->add_option("--s0", args.s0, "initial spot override");
    cmd->add_option("--n", args.n, "step count override");
    cmd->add_option("--m", args.m, "path count override");
    cmd->add_option("--dt", args.dt, "Euler step override");
}

gamelat::RunConfig load_config(const CommonArgs& args) {
    json doc = json::object();
    if (!args.config.empty()) {
        std::string text = args.config;
        if (text.find_first_of('{') != 0) {
            std::ifstream in(args.config);
            if (!in) throw gamelat::ValidationError("cannot open config file: " + args.config);
            std::stringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw gamelat::ValidationError(std::string("config is not valid JSON: ") + e.what());
        }
    }
    gamelat::RunConfig cfg = gamelat::parse_config(doc);
    if (args.threads >= 0) cfg.threads = args.threads;
    if (args.seed) cfg.seed = *args.seed;
    if (args.s0) cfg.s0 = *args.s0;
    if (args.n) cfg.n = *args.n;
    if (args.m) cfg.m = *args.m;
    if (args.dt) cfg.dt = *args.dt;
    if (!(cfg.s0 > 0.0)) throw gamelat::ValidationError("config: s0 must be positive");
    if (cfg.n < 1) throw gamelat::ValidationError("config: n must be >= 1");
    if (cfg.m < 1) throw gamelat::ValidationError("config: m must be >= 1");
    if (cfg.dt && !(*cfg.dt > 0.0)) throw gamelat::ValidationError("config: dt must be positive");
    if (cfg.threads < 1) throw gamelat::ValidationError("config: threads must be >= 1");
    return cfg;
}

void emit(const json& j) { std::cout << j.dump(2) << std::endl; }

std::ofstream open_artifact(const CommonArgs& args, const std::string& name) {
    std::filesystem::create_directories(args.out_dir);
    const auto path = std::filesystem::path(args.out_dir) / name;
    std::ofstream os(path);
    if (!os) throw gamelat::ValidationError("cannot write " + path.string());
    return os;
}

std::string artifact_path(const CommonArgs& args, const std::string& name) {
    return (std::filesystem::path(args.out_dir) / name).string();
}

void maybe_dump_lattice(const CommonArgs& args, const gamelat::Lattice& lat) {
    if (!args.dump_lattice) return;
    auto os = open_artifact(args, "lattice.csv");
    os << "i,z,s,p_up,p_mid,p_down\n";
    os.precision(17);
    for (int i = -lat.n; i <= lat.n; ++i) {
        const auto& p = lat.prob(i);
        os << i << ',' << lat.z(i) << ',' << lat.spot(i) << ',' << p.up << ','
           << p.mid << ',' << p.down << '\n';
    }
}

int cmd_price(const CommonArgs& args) {
    const auto cfg = load_config(args);
    const auto model = gamelat::build_model(cfg.model);
    const auto payoff = gamelat::build(cfg.payoff);
    const auto t0 = std::chrono::steady_clock::now();
    const auto lat = gamelat::build_lattice(model, cfg.s0, cfg.payoff.maturity, cfg.n);
    gamelat::SolveOptions opts;
    opts.keep_surface = cfg.keep_surface || args.dump_surface;
    opts.stop_tol = cfg.tolerance;
    const auto sol = gamelat::solve(lat, payoff, opts);
    const auto t1 = std::chrono::steady_clock::now();
    maybe_dump_lattice(args, lat);
    if (args.dump_surface) {
        auto os = open_artifact(args, "surface.csv");
        gamelat::write_surface_csv(sol, payoff, os);
    }
    emit(json{{"command", "price"},
              {"value", sol.value},
              {"n", sol.n},
              {"h", sol.h},
              {"convention", gamelat::to_string(cfg.payoff.convention)},
              {"wall_time_ms", std::chrono::duration<double, std::milli>(t1 - t0).count()},
              {"config", gamelat::effective_config_json(cfg)}});
    return 0;
}

int cmd_region(const CommonArgs& args) {
    const auto cfg = load_config(args);
    const auto model = gamelat::build_model(cfg.model);
    const auto payoff = gamelat::build(cfg.payoff);
    const auto lat = gamelat::build_lattice(model, cfg.s0, cfg.payoff.maturity, cfg.n);
    gamelat::SolveOptions opts;
    opts.keep_surface = args.dump_surface;
    opts.stop_tol = cfg.tolerance;
    const auto sol = gamelat::solve(lat, payoff, opts);
    maybe_dump_lattice(args, lat);
    if (args.dump_surface) {
        auto os = open_artifact(args, "surface.csv");
        gamelat::write_surface_csv(sol, payoff, os);
    }
    const auto buyer = gamelat::stopping_region(sol, gamelat::Side::buyer);
    const auto seller = gamelat::stopping_region(sol, gamelat::Side::seller);
    {
        auto os = open_artifact(args, "region_buyer.csv");
        gamelat::write_region_csv(buyer, os);
    }
    {
        auto os = open_artifact(args, "region_seller.csv");
        gamelat::write_region_csv(seller, os);
    }
    emit(json{{"command", "region"},
              {"value", sol.value},
              {"buyer_csv", artifact_path(args, "region_buyer.csv")},
              {"seller_csv", artifact_path(args, "region_seller.csv")},
              {"buyer_last_active_t", buyer.last_active_time()},
              {"seller_last_active_t", seller.last_active_time()},
              {"config", gamelat::effective_config_json(cfg)}});
    return 0;
}

int cmd_converge(const CommonArgs& args) {
    auto cfg = load_config(args);
    if (cfg.s0_list.empty()) cfg.s0_list = {cfg.s0};
    if (cfg.n_list.empty())
        throw gamelat::ValidationError("converge: config needs a nonempty n_list");
    const auto model = gamelat::build_model(cfg.model);
    const auto result = gamelat::sweep(model, cfg.payoff, cfg.s0_list, cfg.n_list);
    {
        auto os = open_artifact(args, "sweep.csv");
        gamelat::write_sweep_csv(result, os);
    }
    {
        auto os = open_artifact(args, "diffs.csv");
        gamelat::write_diffs_csv(result, os);
    }
    json rates = json::array();
    for (const auto& r : result.rates)
        rates.push_back({{"s0", r.s0},
                         {"exponent", r.reliable ? json(r.exponent) : json()},
                         {"reliable", r.reliable},
                         {"caveat", r.caveat}});
    emit(json{{"command", "converge"},
              {"sweep_csv", artifact_path(args, "sweep.csv")},
              {"diffs_csv", artifact_path(args, "diffs.csv")},
              {"rates", rates},
              {"config", gamelat::effective_config_json(cfg)}});
    return 0;
}

int cmd_verify_embedding(const CommonArgs& args) {
    const auto cfg = load_config(args);
    const auto model = gamelat::build_model(cfg.model);
    const double z0 = std::log(cfg.s0);
    const double dt = cfg.dt.value_or(cfg.h / 400.0);
    const auto st = gamelat::verify_embedding(model, z0, cfg.h, cfg.m, cfg.seed, dt);
    emit(json{{"command", "verify-embedding"},
              {"z0", st.z0},
              {"h", st.h},
              {"dt", st.dt},
              {"m", st.m},
              {"completed", st.completed},
              {"truncation_fraction", st.truncation_fraction},
              {"mean_dtheta", st.mean_dtheta},
              {"se_dtheta", st.se_dtheta},
              {"freq", {{"down", st.freq[0]}, {"mid", st.freq[1]}, {"up", st.freq[2]}}},
              {"se_freq",
               {{"down", st.se_freq[0]}, {"mid", st.se_freq[1]}, {"up", st.se_freq[2]}}},
              {"target_p",
               {{"down", st.target_p[0]}, {"mid", st.target_p[1]}, {"up", st.target_p[2]}}},
              {"target_dtheta", st.target_dtheta},
              {"config", gamelat::effective_config_json(cfg)}});
    return 0;
}

int cmd_mc_value(const CommonArgs& args) {
    const auto cfg = load_config(args);
    const auto model = gamelat::build_model(cfg.model);
    const auto payoff = gamelat::build(cfg.payoff);
    const auto lat = gamelat::build_lattice(model, cfg.s0, cfg.payoff.maturity, cfg.n);
    gamelat::SolveOptions opts;
    opts.stop_tol = cfg.tolerance;
    const auto sol = gamelat::solve(lat, payoff, opts);
    gamelat::StrategyMode mode = gamelat::StrategyMode::both;
    if (cfg.mode == "buyer_only") mode = gamelat::StrategyMode::buyer_only;
    else if (cfg.mode == "seller_only") mode = gamelat::StrategyMode::seller_only;
    const double dt = cfg.dt.value_or(cfg.payoff.maturity / 2000.0);
    const auto sv = gamelat::evaluate_strategies(sol, model, payoff, mode, cfg.m, cfg.seed, dt);
    json adversaries = json::array();
    for (const auto& a : sv.adversaries)
        adversaries.push_back({{"name", a.name}, {"mean", a.mean}, {"std_error", a.std_error}});
    json out{{"command", "mc-value"},
             {"mean", sv.mean},
             {"std_error", sv.std_error},
             {"m", sv.m},
             {"seed", cfg.seed},
             {"dt", dt},
             {"mode", gamelat::to_string(sv.mode)},
             {"lattice_value", sol.value},
             {"config", gamelat::effective_config_json(cfg)}};
    if (!adversaries.empty()) out["adversaries"] = adversaries;
    emit(out);
    return 0;
}

int cmd_oracle(const CommonArgs& args) {
    const auto cfg = load_config(args);
    const auto model = gamelat::build_model(cfg.model);
    const auto payoff = gamelat::build(cfg.payoff);
    const auto lat = gamelat::build_lattice(model, cfg.s0, cfg.payoff.maturity, cfg.n);
    gamelat::SolveOptions opts;
    opts.stop_tol = cfg.tolerance;
    const auto sol = gamelat::solve(lat, payoff, opts);
    const auto oracle = gamelat::brute_force_value(lat, payoff);
    emit(json{{"command", "oracle"},
              {"solver_value", sol.value},
              {"oracle_infsup", oracle.inf_sup},
              {"oracle_supinf", oracle.sup_inf},
              {"config", gamelat::effective_config_json(cfg)}});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"game-option pricing on recombining trinomial lattices"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* price = app.add_subcommand("price", "solve the lattice game and print the value");
    auto* region = app.add_subcommand("region", "extract both stopping regions as CSV");
    auto* converge = app.add_subcommand("converge", "sweep n and report values/diffs/rates");
    auto* verify = app.add_subcommand("verify-embedding",
                                      "one-step exit statistics vs lattice targets");
    auto* mc = app.add_subcommand("mc-value", "play tree strategies on Euler paths");
    auto* oracle = app.add_subcommand("oracle", "compare against exhaustive n<=3 values");
    for (auto* cmd : {price, region, converge, verify, mc, oracle}) add_common(cmd, args);
    price->add_flag("--dump-lattice", args.dump_lattice, "write lattice.csv");
    price->add_flag("--dump-surface", args.dump_surface, "write surface.csv");
    region->add_flag("--dump-lattice", args.dump_lattice, "write lattice.csv");
    region->add_flag("--dump-surface", args.dump_surface, "write surface.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (price->parsed()) return cmd_price(args);
        if (region->parsed()) return cmd_region(args);
        if (converge->parsed()) return cmd_converge(args);
        if (verify->parsed()) return cmd_verify_embedding(args);
        if (mc->parsed()) return cmd_mc_value(args);
        if (oracle->parsed()) return cmd_oracle(args);
    } catch (const gamelat::ValidationError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const gamelat::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << std::endl;
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }
    return 0;
}
