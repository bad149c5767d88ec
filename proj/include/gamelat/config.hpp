#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gamelat/errors.hpp"
#include "gamelat/payoff.hpp"
#include "gamelat/volatility.hpp"

namespace gamelat {

struct ModelSpec {
    std::string kind = "truncated_cev";
    double sigma = 0.3; // constant kind only
};

// One JSON document describes a run end to end; every command echoes the
// effective config (defaults filled) back into its output so a run can be
// reproduced from the artifact alone.
struct RunConfig {
    ModelSpec model;
    PayoffSpec payoff;
    double s0 = 100.0;
    int n = 1000;
    std::vector<double> s0_list;
    std::vector<int> n_list;
    std::uint64_t seed = 1;
    std::size_t m = 100000;
    std::optional<double> dt;       // command-specific default when absent
    double h = 0.01;                // verify-embedding only
    std::string mode = "both";
    // stop-flag tolerance; 0 = exact obstacle-equality flags
    double tolerance = 0.0;
    bool keep_surface = false;
    int threads = 1;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
T require_number(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw ValidationError("config: missing key '" + std::string(key) + "' in " + where);
    if (!j.at(key).is_number())
        throw ValidationError("config: key '" + std::string(key) + "' in " + where +
                              " must be a number");
    return j.at(key).get<T>();
}

} // namespace detail

inline ModelSpec parse_model_spec(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config: 'model' must be an object");
    detail::reject_unknown_keys(j, {"kind", "sigma"}, "model");
    ModelSpec spec;
    spec.kind = j.value("kind", std::string("truncated_cev"));
    if (spec.kind == "truncated_cev") {
        if (j.contains("sigma"))
            throw ValidationError("config: 'sigma' only applies to the constant model");
    } else if (spec.kind == "constant") {
        spec.sigma = detail::require_number<double>(j, "sigma", "model");
    } else {
        throw ValidationError("config: unknown model kind '" + spec.kind + "'");
    }
    return spec;
}

inline PayoffSpec parse_payoff_spec(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config: 'payoff' must be an object");
    detail::reject_unknown_keys(
        j, {"kind", "strike", "penalty", "rate", "maturity", "convention"}, "payoff");
    PayoffSpec spec;
    const std::string kind = j.value("kind", std::string("game_call"));
    if (kind == "game_call") spec.kind = PayoffKind::game_call;
    else if (kind == "game_put") spec.kind = PayoffKind::game_put;
    else if (kind == "american_call") spec.kind = PayoffKind::american_call;
    else if (kind == "american_put") spec.kind = PayoffKind::american_put;
    else throw ValidationError("config: unknown payoff kind '" + kind + "'");

    spec.strike = detail::require_number<double>(j, "strike", "payoff");
    spec.maturity = detail::require_number<double>(j, "maturity", "payoff");
    spec.rate = j.value("rate", 0.0);
    const bool game =
        spec.kind == PayoffKind::game_call || spec.kind == PayoffKind::game_put;
    if (j.contains("penalty")) {
        if (!game)
            throw ValidationError("config: 'penalty' does not apply to American payoffs");
        spec.penalty = detail::require_number<double>(j, "penalty", "payoff");
    }
    const std::string conv = j.value("convention", std::string(to_string(kDefaultConvention)));
    if (conv == "undiscounted_strike") spec.convention = Convention::undiscounted_strike;
    else if (conv == "literal") spec.convention = Convention::literal;
    else throw ValidationError("config: unknown convention '" + conv + "'");

    if (!(spec.strike > 0.0)) throw ValidationError("config: strike must be positive");
    if (!(spec.maturity > 0.0)) throw ValidationError("config: maturity must be positive");
    if (spec.rate < 0.0) throw ValidationError("config: rate must be nonnegative");
    if (spec.penalty < 0.0) throw ValidationError("config: penalty must be nonnegative");
    return spec;
}

inline RunConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config: document must be a JSON object");
    detail::reject_unknown_keys(j,
                                {"model", "payoff", "s0", "n", "s0_list", "n_list",
                                 "seed", "m", "dt", "h", "mode", "tolerance",
                                 "keep_surface", "threads"},
                                "config");
    RunConfig cfg;
    if (j.contains("model")) cfg.model = parse_model_spec(j.at("model"));
    if (j.contains("payoff")) cfg.payoff = parse_payoff_spec(j.at("payoff"));
    if (j.contains("s0")) cfg.s0 = detail::require_number<double>(j, "s0", "config");
    if (j.contains("n")) cfg.n = detail::require_number<int>(j, "n", "config");
    if (j.contains("s0_list")) cfg.s0_list = j.at("s0_list").get<std::vector<double>>();
    if (j.contains("n_list")) cfg.n_list = j.at("n_list").get<std::vector<int>>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("m")) cfg.m = j.at("m").get<std::size_t>();
    if (j.contains("dt")) cfg.dt = detail::require_number<double>(j, "dt", "config");
    if (j.contains("h")) cfg.h = detail::require_number<double>(j, "h", "config");
    if (j.contains("mode")) {
        cfg.mode = j.at("mode").get<std::string>();
        if (cfg.mode != "both" && cfg.mode != "buyer_only" && cfg.mode != "seller_only")
            throw ValidationError("config: unknown mode '" + cfg.mode + "'");
    }
    if (j.contains("tolerance"))
        cfg.tolerance = detail::require_number<double>(j, "tolerance", "config");
    if (j.contains("keep_surface")) cfg.keep_surface = j.at("keep_surface").get<bool>();
    if (j.contains("threads")) cfg.threads = detail::require_number<int>(j, "threads", "config");

    if (!(cfg.s0 > 0.0)) throw ValidationError("config: s0 must be positive");
    if (cfg.n < 1) throw ValidationError("config: n must be >= 1");
    for (double s : cfg.s0_list)
        if (!(s > 0.0)) throw ValidationError("config: s0_list entries must be positive");
    for (int n : cfg.n_list)
        if (n < 1) throw ValidationError("config: n_list entries must be >= 1");
    if (cfg.m < 1) throw ValidationError("config: m must be >= 1");
    if (cfg.dt && !(*cfg.dt > 0.0)) throw ValidationError("config: dt must be positive");
    if (!(cfg.h > 0.0)) throw ValidationError("config: h must be positive");
    if (!(cfg.tolerance >= 0.0)) throw ValidationError("config: tolerance must be >= 0");
    if (cfg.threads < 1) throw ValidationError("config: threads must be >= 1");
    return cfg;
}

inline VolatilityModel build_model(const ModelSpec& spec) {
    if (spec.kind == "truncated_cev") return make_truncated_cev();
    if (spec.kind == "constant") return make_constant(spec.sigma);
    throw ValidationError("config: unknown model kind '" + spec.kind + "'");
}

inline nlohmann::json effective_config_json(const RunConfig& cfg) {
    nlohmann::json model = {{"kind", cfg.model.kind}};
    if (cfg.model.kind == "constant") model["sigma"] = cfg.model.sigma;

    nlohmann::json payoff = {{"kind", to_string(cfg.payoff.kind)},
                             {"strike", cfg.payoff.strike},
                             {"rate", cfg.payoff.rate},
                             {"maturity", cfg.payoff.maturity},
                             {"convention", to_string(cfg.payoff.convention)}};
    if (cfg.payoff.kind == PayoffKind::game_call ||
        cfg.payoff.kind == PayoffKind::game_put)
        payoff["penalty"] = cfg.payoff.penalty;

    nlohmann::json j = {{"model", model},
                        {"payoff", payoff},
                        {"s0", cfg.s0},
                        {"n", cfg.n},
                        {"seed", cfg.seed},
                        {"m", cfg.m},
                        {"h", cfg.h},
                        {"mode", cfg.mode},
                        {"tolerance", cfg.tolerance},
                        {"keep_surface", cfg.keep_surface},
                        {"threads", cfg.threads}};
    if (cfg.dt) j["dt"] = *cfg.dt;
    if (!cfg.s0_list.empty()) j["s0_list"] = cfg.s0_list;
    if (!cfg.n_list.empty()) j["n_list"] = cfg.n_list;
    return j;
}

} // namespace gamelat
