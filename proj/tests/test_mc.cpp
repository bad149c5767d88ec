#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gamelat/mc.hpp"

using namespace gamelat;

TEST(Rng, DeterministicStreams) {
    SplitMix64 a(42, 7), b(42, 7), c(42, 8);
    for (int j = 0; j < 100; ++j) EXPECT_EQ(a.next_u64(), b.next_u64());
    bool any_diff = false;
    SplitMix64 a2(42, 7);
    for (int j = 0; j < 100; ++j) any_diff |= a2.next_u64() != c.next_u64();
    EXPECT_TRUE(any_diff);
}

TEST(Rng, UniformInUnitInterval) {
    SplitMix64 rng(123, 0);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int draws = 200000;
    for (int j = 0; j < draws; ++j) {
        const double u = rng.next_uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LE(hi, 1.0);
    EXPECT_NEAR(sum / draws, 0.5, 0.005);
}

TEST(Rng, NormalMoments) {
    SplitMix64 rng(9, 0);
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    const int draws = 400000;
    for (int j = 0; j < draws; ++j) {
        const double x = rng.next_normal();
        sum += x;
        sum2 += x * x;
        sum4 += x * x * x * x;
    }
    EXPECT_NEAR(sum / draws, 0.0, 0.01);
    EXPECT_NEAR(sum2 / draws, 1.0, 0.01);
    EXPECT_NEAR(sum4 / draws, 3.0, 0.05);
}

TEST(SimulatePaths, ConstantSigmaTerminalLawIsExact) {
    // Euler is exact for constant coefficients: Z_T - z0 is Gaussian with
    // mean -sigma^2 T / 2 and variance sigma^2 T
    const double sigma = 0.3, T = 1.0, z0 = std::log(100.0);
    const auto model = make_constant(sigma);
    const auto batch = simulate_paths(model, z0, T, 1e-2, 100000, 2024);
    double sum = 0.0, sum2 = 0.0, sum_s = 0.0;
    for (std::size_t p = 0; p < batch.paths(); ++p) {
        const double dzT = batch.terminal(p) - z0;
        sum += dzT;
        sum2 += dzT * dzT;
        sum_s += std::exp(z0 + dzT);
    }
    const double m = static_cast<double>(batch.paths());
    const double mean = sum / m;
    const double var = sum2 / m - mean * mean;
    const double se_mean = sigma * std::sqrt(T / m);
    EXPECT_NEAR(mean, -sigma * sigma * T / 2.0, 3.0 * se_mean);
    EXPECT_NEAR(var, sigma * sigma * T, 5.0 * sigma * sigma * T / std::sqrt(m));
    // martingale property of the discounted price
    const double se_s = 100.0 * sigma * std::sqrt(T / m) * 1.2;
    EXPECT_NEAR(sum_s / m, 100.0, 3.0 * se_s);
}

TEST(SimulatePaths, MartingalePropertyUnderCev) {
    const auto model = make_truncated_cev();
    const double z0 = std::log(100.0);
    const auto batch = simulate_paths(model, z0, 2.0, 1e-3, 100000, 5);
    double sum_s = 0.0, sum_s2 = 0.0;
    for (std::size_t p = 0; p < batch.paths(); ++p) {
        const double s = std::exp(batch.terminal(p));
        sum_s += s;
        sum_s2 += s * s;
    }
    const double m = static_cast<double>(batch.paths());
    const double mean = sum_s / m;
    const double se = std::sqrt((sum_s2 / m - mean * mean) / m);
    EXPECT_NEAR(mean, 100.0, 4.0 * se);
}

TEST(SimulatePaths, SameSeedSameBatch) {
    const auto model = make_truncated_cev();
    const auto a = simulate_paths(model, std::log(90.0), 1.0, 1e-2, 4, 77);
    const auto b = simulate_paths(model, std::log(90.0), 1.0, 1e-2, 4, 77);
    std::vector<double> pa, pb;
    for (std::size_t p = 0; p < 4; ++p) {
        a.path(p, pa);
        b.path(p, pb);
        EXPECT_EQ(pa, pb);
    }
    // terminal() must agree with the stored path end
    a.path(3, pa);
    EXPECT_EQ(a.terminal(3), pa.back());
}

TEST(SimulatePaths, Validation) {
    const auto model = make_constant(0.3);
    EXPECT_THROW(simulate_paths(model, 0.0, 1.0, -1e-3, 10, 1), ValidationError);
    EXPECT_THROW(simulate_paths(model, 0.0, 1.0, 0.3, 10, 1), ValidationError); // no divide
    EXPECT_THROW(simulate_paths(model, 0.0, 1.0, 1e-3, 0, 1), ValidationError);
}

TEST(VerifyEmbedding, ConstantSigmaFrequenciesMatchLattice) {
    const double h = 0.01;
    const auto model = make_constant(0.3);
    const auto st = verify_embedding(model, std::log(100.0), h, 20000, 31, h / 400.0);
    const auto target = transition_probs(std::log(100.0), h, 0.3, model);
    EXPECT_EQ(st.freq[0] + st.freq[1] + st.freq[2], 1.0);
    EXPECT_NEAR(st.freq[2], target.up, 4.0 * st.se_freq[2] + 1e-12);
    EXPECT_NEAR(st.freq[0], target.down, 4.0 * st.se_freq[0] + 1e-12);
    EXPECT_EQ(st.freq[1], 0.0); // single-stage exit when psi == sigma_bar
    EXPECT_LT(st.truncation_fraction, 0.01);
    // exit-time mean carries the known O(sqrt(dt)) detection bias; sanity band
    EXPECT_GT(st.mean_dtheta, 0.9 * h);
    EXPECT_LT(st.mean_dtheta, 1.15 * h);
}

TEST(VerifyEmbedding, CevFrequenciesMatchLattice) {
    const double h = 0.01;
    const auto model = make_truncated_cev();
    for (double s0 : {80.0, 120.0}) {
        const double z0 = std::log(s0);
        const auto st = verify_embedding(model, z0, h, 20000, 57, h / 400.0);
        for (int c = 0; c < 3; ++c)
            EXPECT_NEAR(st.freq[c], st.target_p[c], 4.0 * st.se_freq[c] + 1e-12)
                << "s0=" << s0 << " channel=" << c;
        EXPECT_LT(st.truncation_fraction, 0.01);
        EXPECT_GT(st.mean_dtheta, 0.9 * h);
        EXPECT_LT(st.mean_dtheta, 1.2 * h);
    }
}

TEST(VerifyEmbedding, Reproducible) {
    const auto model = make_truncated_cev();
    const auto a = verify_embedding(model, std::log(100.0), 0.01, 5000, 3, 0.01 / 400.0);
    const auto b = verify_embedding(model, std::log(100.0), 0.01, 5000, 3, 0.01 / 400.0);
    EXPECT_EQ(a.mean_dtheta, b.mean_dtheta);
    EXPECT_EQ(a.freq[2], b.freq[2]);
}

namespace {

Solution solved_call(double s0, int n) {
    const auto cev = make_truncated_cev();
    PayoffSpec spec{PayoffKind::game_call, 100.0, 12.0, 0.06, 2.0, kDefaultConvention};
    return solve(build_lattice(cev, s0, 2.0, n), build(spec));
}

} // namespace

TEST(EvaluateStrategies, RootCancelPaysThePenaltyDeterministically) {
    const auto cev = make_truncated_cev();
    PayoffSpec spec{PayoffKind::game_call, 100.0, 12.0, 0.06, 2.0, kDefaultConvention};
    const auto payoff = build(spec);
    const auto sol = solved_call(110.0, 200);
    const auto sv = evaluate_strategies(sol, cev, payoff, StrategyMode::both, 500, 10,
                                        2.0 / 200);
    // every path pays g at time zero at the grid-represented root spot
    EXPECT_DOUBLE_EQ(sv.mean, payoff.g(0.0, std::exp(std::log(110.0))));
    EXPECT_NEAR(sv.mean, 22.0, 1e-12);
    EXPECT_EQ(sv.std_error, 0.0);
}

TEST(EvaluateStrategies, ZeroPenaltyIsDeterministicImmediateExercise) {
    const auto cev = make_truncated_cev();
    PayoffSpec spec{PayoffKind::game_call, 100.0, 0.0, 0.06, 2.0, kDefaultConvention};
    const auto payoff = build(spec);
    const auto sol = solve(build_lattice(cev, 110.0, 2.0, 100), payoff);
    const auto sv = evaluate_strategies(sol, cev, payoff, StrategyMode::both, 200, 10,
                                        2.0 / 100);
    EXPECT_DOUBLE_EQ(sv.mean, payoff.f(0.0, std::exp(std::log(110.0))));
    EXPECT_NEAR(sv.mean, payoff.f(0.0, 110.0), 1e-12);
    EXPECT_EQ(sv.std_error, 0.0);
}

TEST(EvaluateStrategies, PairValueNearLatticeValue) {
    const auto cev = make_truncated_cev();
    PayoffSpec spec{PayoffKind::game_call, 100.0, 12.0, 0.06, 2.0, kDefaultConvention};
    const auto payoff = build(spec);
    const auto sol = solved_call(90.0, 500);
    const auto sv = evaluate_strategies(sol, cev, payoff, StrategyMode::both, 20000, 10,
                                        2.0 / 500);
    EXPECT_NEAR(sv.mean, sol.value, std::max(4.0 * sv.std_error, 0.2));
}

TEST(EvaluateStrategies, OneSidedBoundsAreOrdered) {
    const auto cev = make_truncated_cev();
    PayoffSpec spec{PayoffKind::game_call, 100.0, 12.0, 0.06, 2.0, kDefaultConvention};
    const auto payoff = build(spec);
    const auto sol = solved_call(90.0, 300);
    const std::size_t m = 20000;
    const double dt = 2.0 / 300;
    const auto both = evaluate_strategies(sol, cev, payoff, StrategyMode::both, m, 10, dt);
    const auto buyer = evaluate_strategies(sol, cev, payoff, StrategyMode::buyer_only, m, 10, dt);
    const auto seller =
        evaluate_strategies(sol, cev, payoff, StrategyMode::seller_only, m, 10, dt);
    ASSERT_EQ(buyer.adversaries.size(), 5u);
    ASSERT_EQ(seller.adversaries.size(), 5u);
    // against a seller who never cancels the buyer's rule earns at least the
    // pair value (the cancellation cap can only pull the payment down)
    const auto& never = buyer.adversaries[0];
    EXPECT_EQ(never.name, "never");
    EXPECT_GE(never.mean, both.mean - 4.0 * (never.std_error + both.std_error));
    // headline numbers are the worst family member for the strategy under test
    for (const auto& adv : buyer.adversaries) EXPECT_LE(buyer.mean, adv.mean + 1e-12);
    for (const auto& adv : seller.adversaries) EXPECT_GE(seller.mean, adv.mean - 1e-12);
    EXPECT_EQ(both.adversaries.size(), 0u);
}

TEST(EvaluateStrategies, ReproducibleAcrossRuns) {
    const auto cev = make_truncated_cev();
    PayoffSpec spec{PayoffKind::game_put, 100.0, 12.0, 0.06, 2.0, kDefaultConvention};
    const auto payoff = build(spec);
    const auto sol = solve(build_lattice(cev, 95.0, 2.0, 100), payoff);
    const auto a = evaluate_strategies(sol, cev, payoff, StrategyMode::both, 3000, 8, 0.02);
    const auto b = evaluate_strategies(sol, cev, payoff, StrategyMode::both, 3000, 8, 0.02);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
}
