#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gamelat/errors.hpp"
#include "gamelat/payoff.hpp"
#include "gamelat/rng.hpp"
#include "gamelat/solver.hpp"
#include "gamelat/volatility.hpp"

namespace gamelat {

namespace detail {

inline std::size_t checked_steps(double horizon, double dt, const char* what) {
    if (!(dt > 0.0)) throw ValidationError(std::string(what) + ": dt must be positive");
    const double ratio = horizon / dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (steps < 1 || std::abs(steps * dt - horizon) > 1e-9 * std::max(1.0, horizon))
        throw ValidationError(std::string(what) + ": dt must divide the horizon");
    return steps;
}

} // namespace detail

// Lazily generated Euler paths of the log-price SDE
//
//   Z_{t+dt} = Z_t + psi(Z_t) sqrt(dt) xi - psi(Z_t)^2 dt / 2,
//
// xi standard normal. Path p always draws from RNG stream p, so the batch is
// fully determined by (seed, m, dt, model, z0) and any subset of paths can be
// regenerated independently.
class PathBatch {
public:
    PathBatch(VolatilityModel model, double z0, double maturity, double dt,
              std::size_t m, std::uint64_t seed)
        : model_(std::move(model)), z0_(z0), maturity_(maturity), dt_(dt), m_(m),
          seed_(seed), steps_(detail::checked_steps(maturity, dt, "simulate_paths")) {
        if (m < 1) throw ValidationError("simulate_paths: need m >= 1");
        if (!std::isfinite(z0)) throw ValidationError("simulate_paths: z0 must be finite");
    }

    std::size_t paths() const { return m_; }
    std::size_t steps() const { return steps_; }
    double dt() const { return dt_; }
    double z0() const { return z0_; }
    double maturity() const { return maturity_; }
    std::uint64_t seed() const { return seed_; }
    const VolatilityModel& model() const { return model_; }

    /// Fills out[0..steps] with one path, out[0] = z0.
    void path(std::size_t p, std::vector<double>& out) const {
        out.resize(steps_ + 1);
        SplitMix64 rng(seed_, p);
        const double sqrt_dt = std::sqrt(dt_);
        double z = z0_;
        out[0] = z;
        for (std::size_t j = 1; j <= steps_; ++j) {
            const double psi = model_.psi(z);
            z += psi * sqrt_dt * rng.next_normal() - 0.5 * psi * psi * dt_;
            out[j] = z;
        }
        if (!std::isfinite(z))
            throw NumericalError("simulate_paths: path " + std::to_string(p) +
                                 " left the finite range");
    }

    /// Terminal log-price of one path without materializing it.
    double terminal(std::size_t p) const {
        SplitMix64 rng(seed_, p);
        const double sqrt_dt = std::sqrt(dt_);
        double z = z0_;
        for (std::size_t j = 0; j < steps_; ++j) {
            const double psi = model_.psi(z);
            z += psi * sqrt_dt * rng.next_normal() - 0.5 * psi * psi * dt_;
        }
        if (!std::isfinite(z))
            throw NumericalError("simulate_paths: path " + std::to_string(p) +
                                 " left the finite range");
        return z;
    }

private:
    VolatilityModel model_;
    double z0_;
    double maturity_;
    double dt_;
    std::size_t m_;
    std::uint64_t seed_;
    std::size_t steps_;
};

inline PathBatch simulate_paths(const VolatilityModel& model, double z0,
                                double maturity, double dt, std::size_t m,
                                std::uint64_t seed) {
    return PathBatch(model, z0, maturity, dt, m, seed);
}

// Empirical one-step embedding statistics against their lattice targets.
struct EmbeddingStats {
    double z0 = 0.0;
    double h = 0.0;
    double dt = 0.0;
    std::size_t m = 0;
    std::size_t completed = 0;
    double truncation_fraction = 0.0;
    double mean_dtheta = 0.0;
    double se_dtheta = 0.0;
    // order: down, mid, up; frequencies over completed paths sum to 1 exactly
    double freq[3] = {0.0, 0.0, 0.0};
    double se_freq[3] = {0.0, 0.0, 0.0};
    double target_p[3] = {0.0, 0.0, 0.0};
    double target_dtheta = 0.0;
};

// Simulates one embedding step per path and measures the exit time and the
// increment against the lattice transition probabilities. Stage one runs the
// diffusion to the first exit of (z0 - A, z0 + A) with A = psi(z0)^2
// sqrt(h)/sigma_bar; stage two restarts from the exit barrier (the continuous
// path sits exactly at z0 +- A there, so the Euler overshoot is discarded
// rather than carried into the next stage) and runs to the first hitting of
// {z0, z0 + sign * sigma_bar sqrt(h)}. The recorded increment is the barrier
// that was hit, one of {-dz, 0, +dz}. Paths that exhaust 50h before
// completing both stages count as truncated and are excluded from the
// statistics; crossings are detected at grid times only (no bridge
// correction), which biases the measured exit time high by O(sqrt(dt)).
inline EmbeddingStats verify_embedding(const VolatilityModel& model, double z0,
                                       double h, std::size_t m, std::uint64_t seed,
                                       double dt) {
    if (!(h > 0.0)) throw ValidationError("verify_embedding: h must be positive");
    if (!(dt > 0.0) || dt >= h)
        throw ValidationError("verify_embedding: need 0 < dt << h");
    if (m < 1) throw ValidationError("verify_embedding: need m >= 1");

    const double sigma_bar = model.sigma_max();
    const double sqrt_h = std::sqrt(h);
    const double dz = sigma_bar * sqrt_h;
    const double psi0 = model.psi(z0);
    // at psi == sigma_bar the two amplitudes coincide; keep them bitwise equal
    const double amp = psi0 == sigma_bar ? dz : psi0 * psi0 * sqrt_h / sigma_bar;
    const double cap = 50.0 * h;
    const double sqrt_dt = std::sqrt(dt);

    EmbeddingStats stats;
    stats.z0 = z0;
    stats.h = h;
    stats.dt = dt;
    stats.m = m;
    stats.target_dtheta = h;
    const ProbTriple target = transition_probs(z0, h, sigma_bar, model);
    stats.target_p[0] = target.down;
    stats.target_p[1] = target.mid;
    stats.target_p[2] = target.up;

    std::size_t count[3] = {0, 0, 0};
    std::size_t truncated = 0;
    double sum_theta = 0.0, sum_theta_sq = 0.0;

    for (std::size_t p = 0; p < m; ++p) {
        SplitMix64 rng(seed, p);
        double z = z0;
        double elapsed = 0.0;
        bool done = false;

        int side = 0;
        while (elapsed < cap) {
            if (z - z0 >= amp) { side = 1; break; }
            if (z - z0 <= -amp) { side = -1; break; }
            const double psi = model.psi(z);
            z += psi * sqrt_dt * rng.next_normal() - 0.5 * psi * psi * dt;
            elapsed += dt;
        }
        int increment = 0;
        if (side != 0) {
            z = z0 + side * amp; // Z at the stage-one exit is exactly z0 +- A
            // far barrier in absolute coordinates: when psi(z0) == sigma_bar
            // the snapped point coincides with it bitwise and stage two
            // absorbs immediately
            const double far = z0 + side * dz;
            while (elapsed < cap) {
                if (side > 0) {
                    if (z >= far) { increment = 1; done = true; break; }
                    if (z <= z0) { increment = 0; done = true; break; }
                } else {
                    if (z <= far) { increment = -1; done = true; break; }
                    if (z >= z0) { increment = 0; done = true; break; }
                }
                const double psi = model.psi(z);
                z += psi * sqrt_dt * rng.next_normal() - 0.5 * psi * psi * dt;
                elapsed += dt;
            }
        }
        if (!done) {
            ++truncated;
            continue;
        }
        ++count[increment + 1];
        sum_theta += elapsed;
        sum_theta_sq += elapsed * elapsed;
    }

    stats.completed = m - truncated;
    stats.truncation_fraction = static_cast<double>(truncated) / static_cast<double>(m);
    if (stats.completed > 0) {
        const double mc = static_cast<double>(stats.completed);
        stats.mean_dtheta = sum_theta / mc;
        const double var =
            std::max(0.0, sum_theta_sq / mc - stats.mean_dtheta * stats.mean_dtheta);
        stats.se_dtheta = std::sqrt(var / mc);
        stats.freq[0] = static_cast<double>(count[0]) / mc;
        stats.freq[1] = static_cast<double>(count[1]) / mc;
        // complement keeps the partition summing to 1.0 exactly
        stats.freq[2] = 1.0 - (stats.freq[0] + stats.freq[1]);
        for (int c = 0; c < 3; ++c)
            stats.se_freq[c] = std::sqrt(stats.freq[c] * (1.0 - stats.freq[c]) / mc);
    }
    return stats;
}

enum class StrategyMode { both, buyer_only, seller_only };

inline const char* to_string(StrategyMode m) {
    switch (m) {
        case StrategyMode::both: return "both";
        case StrategyMode::buyer_only: return "buyer_only";
        case StrategyMode::seller_only: return "seller_only";
    }
    return "?";
}

struct AdversaryResult {
    std::string name;
    double mean = 0.0;
    double std_error = 0.0;
};

struct StrategyValue {
    StrategyMode mode = StrategyMode::both;
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t m = 0;
    // one entry per adversary heuristic in buyer_only / seller_only modes
    std::vector<AdversaryResult> adversaries;
};

// Plays the tree-derived stopping rules on continuous Euler paths. At each
// grid time t_k the path state maps to its nearest lattice node, i =
// round((Z - z0)/dz) clamped to |i| <= k, and the player stops at the first
// k whose flag is set (the buyer is forced to stop at maturity; simultaneous
// stops pay the buyer). In buyer_only / seller_only modes the opponent plays
// a small family of fixed heuristics instead - never stop, stop when the
// buyer payoff first turns positive, stop at j T/4 - and the headline number
// is the worst family member for the strategy under test: a one-sided
// empirical bound, not the continuous-time inf/sup.
inline StrategyValue evaluate_strategies(const Solution& sol,
                                         const VolatilityModel& model,
                                         const GamePayoff& payoff, StrategyMode mode,
                                         std::size_t m, std::uint64_t seed, double dt) {
    if (m < 1) throw ValidationError("evaluate_strategies: need m >= 1");
    const double T = sol.maturity;
    const std::size_t steps = detail::checked_steps(T, dt, "evaluate_strategies");
    const int n = sol.n;
    const double sqrt_dt = std::sqrt(dt);

    // grid-time step index for each tree level
    std::vector<std::size_t> level_step(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        level_step[static_cast<std::size_t>(k)] =
            static_cast<std::size_t>(std::llround(k * sol.h / dt));

    const bool tree_seller = mode != StrategyMode::buyer_only && sol.cancellable;
    const bool tree_buyer = mode != StrategyMode::seller_only;

    struct Opponent {
        std::string name;
        int fixed_level = -1; // stop at this level (approximately j T/4)
        bool itm_touch = false;
        bool never = false;
    };
    std::vector<Opponent> opponents;
    if (mode != StrategyMode::both) {
        opponents.push_back({"never", -1, false, true});
        opponents.push_back({"first_itm_touch", -1, true, false});
        for (int j = 1; j <= 3; ++j)
            opponents.push_back({"fixed_t" + std::to_string(j) + "T4",
                                 static_cast<int>(std::llround(j * n / 4.0)), false,
                                 false});
    } else {
        opponents.push_back({"tree", -1, false, false});
    }

    const std::size_t n_opp = opponents.size();
    // Welford accumulation: exact zero variance when every payment is equal.
    std::vector<double> mean_acc(n_opp, 0.0), m2_acc(n_opp, 0.0);

    std::vector<double> z_at_level(static_cast<std::size_t>(n) + 1);
    for (std::size_t p = 0; p < m; ++p) {
        SplitMix64 rng(seed, p);
        double z = sol.z0;
        std::size_t next_level = 0;
        for (std::size_t j = 0; j <= steps; ++j) {
            while (next_level <= static_cast<std::size_t>(n) &&
                   j == level_step[next_level]) {
                z_at_level[next_level] = z;
                ++next_level;
            }
            if (j == steps) break;
            const double psi = model.psi(z);
            z += psi * sqrt_dt * rng.next_normal() - 0.5 * psi * psi * dt;
        }

        // tree-rule stopping levels for this path
        int buyer_k = n, seller_k = n + 1; // n+1 = never cancels
        bool buyer_found = false, seller_found = false;
        int first_itm = n + 1;
        for (int k = 0; k <= n; ++k) {
            const double zk = z_at_level[static_cast<std::size_t>(k)];
            int i = static_cast<int>(std::llround((zk - sol.z0) / sol.dz));
            i = std::clamp(i, -k, k);
            if (!buyer_found && tree_buyer && sol.buyer_stop(k, i)) {
                buyer_k = k;
                buyer_found = true;
            }
            if (!seller_found && tree_seller && sol.seller_stop(k, i)) {
                seller_k = k;
                seller_found = true;
            }
            if (mode != StrategyMode::both && first_itm > n &&
                payoff.f(k * sol.h, std::exp(zk)) > 0.0)
                first_itm = k;
        }

        for (std::size_t o = 0; o < n_opp; ++o) {
            int bk = buyer_k, sk = seller_k;
            const Opponent& opp = opponents[o];
            if (mode == StrategyMode::buyer_only) {
                sk = n + 1;
                if (!opp.never && sol.cancellable) {
                    if (opp.itm_touch) sk = std::min(first_itm, n + 1);
                    if (opp.fixed_level >= 0) sk = opp.fixed_level;
                }
            } else if (mode == StrategyMode::seller_only) {
                bk = n;
                if (opp.itm_touch) bk = std::min(first_itm, n);
                if (opp.fixed_level >= 0) bk = std::min(opp.fixed_level, n);
            }
            double pay;
            if (sk < bk) {
                const double t = sk * sol.h;
                pay = payoff.g(t, std::exp(z_at_level[static_cast<std::size_t>(sk)]));
            } else {
                const double t = bk * sol.h;
                pay = payoff.f(t, std::exp(z_at_level[static_cast<std::size_t>(bk)]));
            }
            const double d = pay - mean_acc[o];
            mean_acc[o] += d / static_cast<double>(p + 1);
            m2_acc[o] += d * (pay - mean_acc[o]);
        }
    }

    StrategyValue out;
    out.mode = mode;
    out.m = m;
    const double md = static_cast<double>(m);
    std::vector<AdversaryResult> results(n_opp);
    for (std::size_t o = 0; o < n_opp; ++o) {
        results[o].name = opponents[o].name;
        results[o].mean = mean_acc[o];
        results[o].std_error = std::sqrt(std::max(0.0, m2_acc[o] / md) / md);
    }
    std::size_t pick = 0;
    for (std::size_t o = 1; o < n_opp; ++o) {
        if (mode == StrategyMode::buyer_only
                ? results[o].mean < results[pick].mean
                : results[o].mean > results[pick].mean)
            pick = o;
    }
    out.mean = results[pick].mean;
    out.std_error = results[pick].std_error;
    if (mode != StrategyMode::both) out.adversaries = std::move(results);
    return out;
}

} // namespace gamelat
