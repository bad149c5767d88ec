#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "gamelat/errors.hpp"
#include "gamelat/lattice.hpp"
#include "gamelat/payoff.hpp"

namespace gamelat {

struct SolveOptions {
    bool keep_surface = false;
    // Stop flags: the sweep assigns J the obstacle value bitwise whenever the
    // obstacle binds (max/min return one of their arguments), so the default
    // is exact equality. A positive stop_tol additionally flags nodes whose
    // value lands within stop_tol*(1 + |obstacle|) of an obstacle without
    // binding, capped at half the obstacle gap so the bands cannot overlap.
    // A purely relative band with no cap would be wider than the gap itself
    // at large-spot nodes (|g| ~ 1e15, gap ~ 10) and flag rounding noise.
    double stop_tol = 0.0;
};

// Output of one backward sweep: the value, both players' stop flags on the
// triangular node set {(k, i): 0 <= k <= n, |i| <= k}, and optionally the
// value surface. Immutable once returned.
class Solution {
public:
    double value = 0.0;
    int n = 0;
    double h = 0.0;
    double maturity = 0.0;
    double z0 = 0.0;
    double dz = 0.0;
    double rate = 0.0;
    bool cancellable = true;

    bool buyer_stop(int k, int i) const { return buyer_[idx(k, i)] != 0; }
    bool seller_stop(int k, int i) const { return seller_[idx(k, i)] != 0; }

    bool has_surface() const { return !surface_.empty(); }
    double surface(int k, int i) const { return surface_[idx(k, i)]; }

    /// Discounted spot at node (k, i); independent of k.
    double spot(int i) const { return std::exp(z0 + i * dz); }
    /// Undiscounted coordinate e^{r t_k} * spot(i) used for stopping regions.
    double undiscounted(int k, int i) const {
        return std::exp(rate * (k * h) + z0 + i * dz);
    }

private:
    friend Solution solve(const Lattice&, const GamePayoff&, const SolveOptions&);

    // Triangular layout: level k starts at offset k^2 and holds 2k+1 nodes.
    std::size_t idx(int k, int i) const {
        return static_cast<std::size_t>(k) * k + static_cast<std::size_t>(i + k);
    }

    std::vector<std::uint8_t> buyer_;
    std::vector<std::uint8_t> seller_;
    std::vector<double> surface_;
};

// Backward recursion for the Dynkin game on the lattice:
//
//   J_n(z) = f(T, e^z)
//   J_k(z) = max( f(kh, e^z), min( g(kh, e^z), sum_i p_i(z) J_{k+1}(z + i dz) ) )
//
// with the min(.) branch skipped for no-cancellation payoffs. The summation
// order over children is fixed (down, mid, up) so identical inputs give
// bit-identical values. O(n^2) node updates, two rolling value rows.
inline Solution solve(const Lattice& lat, const GamePayoff& payoff,
                      const SolveOptions& opts = {}) {
    if (std::abs(payoff.maturity() - lat.maturity) >
        1e-12 * std::max(1.0, lat.maturity))
        throw ValidationError("solve: payoff maturity does not match lattice");

    const int n = lat.n;
    const std::size_t width = 2 * static_cast<std::size_t>(n) + 1;
    const std::size_t nodes = static_cast<std::size_t>(n + 1) * (n + 1);
    const bool cancel = payoff.cancellable();
    const double tol = opts.stop_tol;

    Solution sol;
    sol.n = n;
    sol.h = lat.h;
    sol.maturity = lat.maturity;
    sol.z0 = lat.z0;
    sol.dz = lat.dz;
    sol.rate = payoff.rate();
    sol.cancellable = cancel;
    sol.buyer_.assign(nodes, 0);
    sol.seller_.assign(nodes, 0);
    if (opts.keep_surface) sol.surface_.assign(nodes, 0.0);

    std::vector<double> spots(width);
    for (int i = -n; i <= n; ++i) spots[static_cast<std::size_t>(i + n)] = lat.spot(i);

    std::vector<double> cur(width, 0.0), next(width, 0.0);

    auto flag_node = [&](int k, int i, double j, double fv, double gv) {
        const std::size_t at = sol.idx(k, i);
        if (cancel) {
            const double gap = gv - fv;
            const double half_gap = 0.5 * gap;
            const double band_f = std::min(tol * (1.0 + std::abs(fv)), half_gap);
            const double band_g = std::min(tol * (1.0 + std::abs(gv)), half_gap);
            if (j == fv || j <= fv + band_f) sol.buyer_[at] = 1;
            // A seller flag is only meaningful when the obstacle gap clears
            // the rounding scale of the values at this node. At extreme-spot
            // nodes (|g| ~ 1e15, gap ~ 10 ~ 20 ulp) the continuation's
            // rounding noise can land bitwise on g.
            const bool resolvable =
                gap > 128.0 * std::numeric_limits<double>::epsilon() *
                          (1.0 + std::abs(gv));
            if ((gap == 0.0 && j == gv) ||
                (resolvable && (j == gv || j >= gv - band_g)))
                sol.seller_[at] = 1;
        } else if (j == fv || j <= fv + tol * (1.0 + std::abs(fv))) {
            sol.buyer_[at] = 1;
        }
        if (opts.keep_surface) sol.surface_[at] = j;
    };

    for (int i = -n; i <= n; ++i) {
        const std::size_t c = static_cast<std::size_t>(i + n);
        const double fv = payoff.f(lat.maturity, spots[c]);
        if (!std::isfinite(fv))
            throw NumericalError("solve: terminal payoff not finite");
        const double gv = cancel ? payoff.g(lat.maturity, spots[c]) : 0.0;
        if (cancel && gv < fv)
            throw NumericalError("solve: obstacle order g < f at maturity");
        cur[c] = fv;
        flag_node(n, i, fv, fv, gv);
    }

    for (int k = n - 1; k >= 0; --k) {
        const double t = k * lat.h;
        for (int i = -k; i <= k; ++i) {
            const std::size_t c = static_cast<std::size_t>(i + n);
            const ProbTriple& p = lat.prob(i);
            const double cont =
                p.down * cur[c - 1] + p.mid * cur[c] + p.up * cur[c + 1];
            const double fv = payoff.f(t, spots[c]);
            double j, gv = 0.0;
            if (cancel) {
                gv = payoff.g(t, spots[c]);
                if (gv < fv)
                    throw NumericalError("solve: obstacle order g < f at node k=" +
                                         std::to_string(k) + " i=" + std::to_string(i));
                j = std::max(fv, std::min(gv, cont));
            } else {
                j = std::max(fv, cont);
            }
            next[c] = j;
            flag_node(k, i, j, fv, gv);
        }
        std::swap(cur, next);
    }

    sol.value = cur[static_cast<std::size_t>(n)];
    return sol;
}

enum class Side { buyer, seller };

inline const char* to_string(Side s) { return s == Side::buyer ? "buyer" : "seller"; }

struct RegionInterval {
    double s_lo = 0.0;
    double s_hi = 0.0;
};

struct RegionRow {
    double t = 0.0;
    // Disjoint, sorted intervals of undiscounted spot coordinates.
    std::vector<RegionInterval> intervals;

    bool empty() const { return intervals.empty(); }
    double lo() const { return intervals.front().s_lo; }
    double hi() const { return intervals.back().s_hi; }
};

// Stopping region in undiscounted coordinates e^{r t_k} * S_0 * e^{i dz}.
// One row per time level (possibly empty); contiguous stopping nodes merge
// into one interval.
struct StoppingRegion {
    Side side = Side::buyer;
    std::vector<RegionRow> rows; // rows[k] is level k

    /// Largest t with a nonempty row, or a negative value if none.
    double last_active_time() const {
        for (auto it = rows.rbegin(); it != rows.rend(); ++it)
            if (!it->empty()) return it->t;
        return -1.0;
    }
};

inline StoppingRegion stopping_region(const Solution& sol, Side side) {
    StoppingRegion region;
    region.side = side;
    region.rows.resize(static_cast<std::size_t>(sol.n) + 1);
    for (int k = 0; k <= sol.n; ++k) {
        RegionRow& row = region.rows[static_cast<std::size_t>(k)];
        row.t = k * sol.h;
        int run_start = 0;
        bool in_run = false;
        auto flush = [&](int run_end) {
            row.intervals.push_back(
                {sol.undiscounted(k, run_start), sol.undiscounted(k, run_end)});
        };
        for (int i = -k; i <= k; ++i) {
            const bool stop =
                side == Side::buyer ? sol.buyer_stop(k, i) : sol.seller_stop(k, i);
            if (stop && !in_run) {
                run_start = i;
                in_run = true;
            } else if (!stop && in_run) {
                flush(i - 1);
                in_run = false;
            }
        }
        if (in_run) flush(k);
    }
    return region;
}

/// CSV schema: side,t,s_lo,s_hi - one row per interval, empty levels skipped.
inline void write_region_csv(const StoppingRegion& region, std::ostream& os) {
    os << "side,t,s_lo,s_hi\n";
    os.precision(17);
    for (const RegionRow& row : region.rows)
        for (const RegionInterval& iv : row.intervals)
            os << to_string(region.side) << ',' << row.t << ',' << iv.s_lo << ','
               << iv.s_hi << '\n';
}

/// Optional full surface dump: k,i,t,s,J,f,g,buyer_stop,seller_stop.
inline void write_surface_csv(const Solution& sol, const GamePayoff& payoff,
                              std::ostream& os) {
    if (!sol.has_surface())
        throw ValidationError("write_surface_csv: solve() did not keep the surface");
    os << "k,i,t,s,J,f,g,buyer_stop,seller_stop\n";
    os.precision(17);
    for (int k = 0; k <= sol.n; ++k) {
        const double t = k * sol.h;
        for (int i = -k; i <= k; ++i) {
            const double s = sol.spot(i);
            os << k << ',' << i << ',' << t << ',' << s << ',' << sol.surface(k, i)
               << ',' << payoff.f(t, s) << ',';
            if (sol.cancellable) os << payoff.g(t, s);
            os << ',' << (sol.buyer_stop(k, i) ? 1 : 0) << ','
               << (sol.seller_stop(k, i) ? 1 : 0) << '\n';
        }
    }
}

struct OracleValue {
    double inf_sup = 0.0;
    double sup_inf = 0.0;
};

namespace detail {

// History tree of the trinomial walk for small n: interior nodes are move
// prefixes of length < n, stored level by level. Node q at level k has
// children 3q + m at level k+1, m in {0,1,2} meaning a move of m-1.
inline std::size_t level_start(int k) {
    // 1 + 3 + ... + 3^{k-1}
    std::size_t s = 0, p = 1;
    for (int j = 0; j < k; ++j) {
        s += p;
        p *= 3;
    }
    return s;
}

} // namespace detail

// Exhaustive oracle for the lattice Dynkin game, n <= 3. Adapted stopping
// rules are decision functions on history prefixes (maturity forces a stop);
// the outer player's rules are enumerated as bitmasks over interior history
// nodes and the inner player's best response is computed exactly on the
// history tree, weighting each branch by its transition probability. Returns
// both orderings; they agree when the game has a value.
inline OracleValue brute_force_value(const Lattice& lat, const GamePayoff& payoff) {
    if (lat.n > 3)
        throw ValidationError("brute_force_value: history tree only built for n <= 3");
    if (std::abs(payoff.maturity() - lat.maturity) >
        1e-12 * std::max(1.0, lat.maturity))
        throw ValidationError("brute_force_value: payoff maturity does not match lattice");

    const int n = lat.n;
    const std::size_t interior = detail::level_start(n);

    // value of the subtree rooted at history node (id, k, i) for a fixed
    // outer-player mask; the inner player responds optimally.
    auto response = [&](std::uint32_t mask, bool seller_fixed) {
        auto rec = [&](auto&& self, std::size_t id, int k, int i) -> double {
            const double s = lat.spot(i);
            if (k == n) return payoff.f(lat.maturity, s);
            const double t = k * lat.h;
            const double fv = payoff.f(t, s);
            const bool stops = (mask >> id) & 1u;
            if (seller_fixed && payoff.cancellable() && stops) {
                // seller cancels here: buyer takes f by stopping too (tie goes
                // to the buyer) or collects g by continuing
                return std::max(fv, payoff.g(t, s));
            }
            if (!seller_fixed && stops) return fv;
            const ProbTriple& p = lat.prob(i);
            const std::size_t child = detail::level_start(k + 1) +
                                      3 * (id - detail::level_start(k));
            const double cont = p.down * self(self, child + 0, k + 1, i - 1) +
                                p.mid * self(self, child + 1, k + 1, i) +
                                p.up * self(self, child + 2, k + 1, i + 1);
            if (seller_fixed) return std::max(fv, cont);
            return payoff.cancellable() ? std::min(payoff.g(t, s), cont) : cont;
        };
        return rec(rec, 0, 0, 0);
    };

    OracleValue v;
    if (!payoff.cancellable()) {
        // no seller action: plain optimal stopping either way
        v.inf_sup = response(0u, true);
        v.sup_inf = v.inf_sup;
        return v;
    }
    const std::uint32_t rules = 1u << interior;
    double inf_sup = std::numeric_limits<double>::infinity();
    double sup_inf = -std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < rules; ++mask) {
        inf_sup = std::min(inf_sup, response(mask, true));
        sup_inf = std::max(sup_inf, response(mask, false));
    }
    v.inf_sup = inf_sup;
    v.sup_inf = sup_inf;
    return v;
}

} // namespace gamelat
