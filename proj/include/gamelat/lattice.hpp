#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "gamelat/errors.hpp"
#include "gamelat/volatility.hpp"

namespace gamelat {

struct ProbTriple {
    double up = 0.0;
    double mid = 0.0;
    double down = 0.0;
};

// One-step trinomial transition probabilities at log-price z.
//
// With a = sigma_bar*sqrt(h) and A = psi(z)^2*sqrt(h)/sigma_bar in (0, a],
// the two-stage first-hitting construction gives
//
//   p_up   = (1 - e^{-A})(e^{A} - 1) / [(e^{A} - e^{-A})(e^{a} - 1)]
//   p_down = e^{a} * p_up
//   p_mid  = 1 - p_up - p_down
//
// which we evaluate in the algebraically equivalent form
//
//   p_up = tanh(A/2) / expm1(a).
//
// tanh/expm1 avoid the e^{±A} cancellation for tiny A and reproduce the
// A -> 0 expansion p_up -> A / (2(e^{a}-1)) without a special branch. The
// martingale identity p_up e^{a} + p_mid + p_down e^{-a} = 1 is an algebraic
// consequence of p_down = e^{a} p_up, and p_up + p_down <= 1 holds exactly
// when psi(z) <= sigma_bar.
inline ProbTriple transition_probs(double z, double h, double sigma_bar,
                                   const VolatilityModel& model) {
    if (!(h > 0.0)) throw ValidationError("transition_probs: h must be positive");
    if (!(sigma_bar > 0.0))
        throw ValidationError("transition_probs: sigma_bar must be positive");

    const double psi = model.psi(z); // throws BoundViolation outside declared bounds
    if (!(psi > 0.0))
        throw NumericalError("transition_probs: degenerate psi(z) <= 0");
    if (psi > sigma_bar)
        throw BoundViolation("transition_probs: psi(z) exceeds sigma_bar");

    const double sqrt_h = std::sqrt(h);
    const double a = sigma_bar * sqrt_h;
    const double amp = psi * psi * sqrt_h / sigma_bar;

    ProbTriple p;
    p.up = std::tanh(0.5 * amp) / std::expm1(a);
    p.down = std::exp(a) * p.up;
    p.mid = 1.0 - p.up - p.down;

    // Rounding can leave p_mid a few ulp negative (exactly -2^-53-scale when
    // psi == sigma_bar); clamp and renormalize. A deviation beyond 1e-12 is a
    // real bug, not rounding.
    const double sum = p.up + p.mid + p.down;
    if (std::abs(sum - 1.0) > 1e-12)
        throw NumericalError("transition_probs: probabilities sum to " +
                             std::to_string(sum));
    auto clamp01 = [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };
    p.up = clamp01(p.up);
    p.mid = clamp01(p.mid);
    p.down = clamp01(p.down);
    const double s = p.up + p.mid + p.down;
    p.up /= s;
    p.mid /= s;
    p.down /= s;
    return p;
}

// Recombining log-price grid z_i = z0 + i*dz, i = -n..n, with dz =
// sigma_bar*sqrt(h). The chain is time-homogeneous, so transition triples
// are stored once per spatial index: 2n+1 evaluations, O(n) memory. The full
// width is kept even though level k only reaches |i| <= k.
struct Lattice {
    int n = 0;
    double h = 0.0;
    double maturity = 0.0;
    double sigma_bar = 0.0;
    double z0 = 0.0;
    double dz = 0.0;
    std::vector<ProbTriple> probs; // index i + n

    double z(int i) const { return z0 + i * dz; }
    double spot(int i) const { return std::exp(z(i)); }
    const ProbTriple& prob(int i) const { return probs[static_cast<std::size_t>(i + n)]; }
};

inline Lattice build_lattice(const VolatilityModel& model, double s0, double maturity,
                             int n) {
    if (!(s0 > 0.0)) throw ValidationError("build_lattice: s0 must be positive");
    if (!(maturity > 0.0)) throw ValidationError("build_lattice: maturity must be positive");
    if (n < 1) throw ValidationError("build_lattice: need n >= 1");

    Lattice lat;
    lat.n = n;
    lat.maturity = maturity;
    lat.h = maturity / n;
    lat.sigma_bar = model.sigma_max();
    lat.z0 = std::log(s0);
    lat.dz = lat.sigma_bar * std::sqrt(lat.h);
    lat.probs.reserve(2 * static_cast<std::size_t>(n) + 1);
    for (int i = -n; i <= n; ++i)
        lat.probs.push_back(transition_probs(lat.z(i), lat.h, lat.sigma_bar, model));
    return lat;
}

} // namespace gamelat
