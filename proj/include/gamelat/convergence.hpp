#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "gamelat/lattice.hpp"
#include "gamelat/payoff.hpp"
#include "gamelat/solver.hpp"

namespace gamelat {

struct SweepRow {
    double s0 = 0.0;
    int n = 0;
    double value = 0.0;
    double wall_time_ms = 0.0;
};

struct SweepDiff {
    double s0 = 0.0;
    int n_lo = 0;
    int n_hi = 0;
    double abs_diff = 0.0;
};

// Least-squares slope of log|V_{n_j} - V_{n_{j+1}}| against log n_j. This is
// an empirical Cauchy rate computed from successive differences, not the
// error-bound exponent: the two need not match at small n, and zero diffs
// (immediate-exercise instances) leave nothing to fit.
struct RateFit {
    double s0 = 0.0;
    double exponent = std::nan("");
    bool reliable = false;
    std::string caveat = "empirical Cauchy rate from successive diffs";
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepDiff> diffs;
    std::vector<RateFit> rates;
};

/// One solve per (s0, n) cell; rows ordered s0-major, n ascending.
inline SweepResult sweep(const VolatilityModel& model, const PayoffSpec& payoff_spec,
                         const std::vector<double>& s0_list,
                         const std::vector<int>& n_list) {
    if (s0_list.empty() || n_list.empty())
        throw ValidationError("sweep: s0_list and n_list must be nonempty");
    for (std::size_t j = 1; j < n_list.size(); ++j)
        if (n_list[j] <= n_list[j - 1])
            throw ValidationError("sweep: n_list must be strictly ascending");

    const GamePayoff payoff = build(payoff_spec);
    SweepResult result;
    result.rows.reserve(s0_list.size() * n_list.size());

    for (double s0 : s0_list) {
        std::vector<double> values;
        values.reserve(n_list.size());
        for (int n : n_list) {
            const auto t0 = std::chrono::steady_clock::now();
            const Lattice lat = build_lattice(model, s0, payoff_spec.maturity, n);
            const Solution sol = solve(lat, payoff);
            const auto t1 = std::chrono::steady_clock::now();
            const double ms =
                std::chrono::duration<double, std::milli>(t1 - t0).count();
            result.rows.push_back({s0, n, sol.value, ms > 0.0 ? ms : 1e-6});
            values.push_back(sol.value);
        }
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        std::size_t pts = 0;
        for (std::size_t j = 0; j + 1 < values.size(); ++j) {
            const double d = std::abs(values[j] - values[j + 1]);
            result.diffs.push_back({s0, n_list[j], n_list[j + 1], d});
            if (d > 0.0) {
                const double x = std::log(static_cast<double>(n_list[j]));
                const double y = std::log(d);
                sx += x; sy += y; sxx += x * x; sxy += x * y;
                ++pts;
            }
        }
        RateFit fit;
        fit.s0 = s0;
        const double denom = pts * sxx - sx * sx;
        if (pts >= 2 && denom > 0.0) {
            fit.exponent = (pts * sxy - sx * sy) / denom;
            fit.reliable = true;
        } else {
            fit.caveat += "; too few nonzero diffs to fit";
        }
        result.rates.push_back(fit);
    }
    return result;
}

/// CSV schema: s0,n,value,wall_time_ms.
inline void write_sweep_csv(const SweepResult& result, std::ostream& os) {
    os << "s0,n,value,wall_time_ms\n";
    os.precision(17);
    for (const SweepRow& r : result.rows)
        os << r.s0 << ',' << r.n << ',' << r.value << ',' << r.wall_time_ms << '\n';
}

/// Companion diffs CSV: s0,n_lo,n_hi,abs_diff.
inline void write_diffs_csv(const SweepResult& result, std::ostream& os) {
    os << "s0,n_lo,n_hi,abs_diff\n";
    os.precision(17);
    for (const SweepDiff& d : result.diffs)
        os << d.s0 << ',' << d.n_lo << ',' << d.n_hi << ',' << d.abs_diff << '\n';
}

} // namespace gamelat
