#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "gamelat/errors.hpp"

namespace gamelat {

enum class PayoffKind { game_call, game_put, american_call, american_put, custom };

// How the strike is compared against the discounted state s:
//   undiscounted_strike  f(t,s) = e^{-rt} * phi(e^{rt} s)   (standard contract)
//   literal              f(t,s) = e^{-rt} * phi(s)
// Both agree at t = 0. The repo default is the convention that reproduces the
// published price tables; see the acceptance suite.
enum class Convention { undiscounted_strike, literal };

inline constexpr Convention kDefaultConvention = Convention::undiscounted_strike;

inline const char* to_string(PayoffKind k) {
    switch (k) {
        case PayoffKind::game_call: return "game_call";
        case PayoffKind::game_put: return "game_put";
        case PayoffKind::american_call: return "american_call";
        case PayoffKind::american_put: return "american_put";
        case PayoffKind::custom: return "custom";
    }
    return "?";
}

inline const char* to_string(Convention c) {
    return c == Convention::undiscounted_strike ? "undiscounted_strike" : "literal";
}

struct PayoffSpec {
    PayoffKind kind = PayoffKind::game_call;
    double strike = 100.0;
    double penalty = 0.0; // ignored for american_* kinds
    double rate = 0.0;
    double maturity = 1.0;
    Convention convention = kDefaultConvention;
};

// Discounted payoff pair: f is the buyer's exercise payoff, g the seller's
// cancellation payoff. The American case carries no g ("no-cancellation")
// instead of g = +inf, so the solver can skip the min(.) branch without
// feeding infinities into the arithmetic.
class GamePayoff {
public:
    using Fn = std::function<double(double, double)>; // (t, discounted spot)

    /// Cancellable payoff; caller promises g >= f (re-checked on every node).
    GamePayoff(Fn buyer, Fn seller, double maturity, double rate,
               Convention convention = kDefaultConvention)
        : f_(std::move(buyer)), g_(std::move(seller)), maturity_(maturity),
          rate_(rate), convention_(convention) {
        validate();
    }

    /// No-cancellation (American style) payoff.
    GamePayoff(Fn buyer, double maturity, double rate,
               Convention convention = kDefaultConvention)
        : f_(std::move(buyer)), g_(std::nullopt), maturity_(maturity),
          rate_(rate), convention_(convention) {
        validate();
    }

    double f(double t, double s) const { return f_(t, s); }

    double g(double t, double s) const {
        if (!g_) throw ValidationError("payoff: no-cancellation payoff has no g");
        return (*g_)(t, s);
    }

    bool cancellable() const { return g_.has_value(); }
    double maturity() const { return maturity_; }
    double rate() const { return rate_; }
    Convention convention() const { return convention_; }

private:
    void validate() const {
        if (!(maturity_ > 0.0)) throw ValidationError("payoff: maturity must be positive");
        if (rate_ < 0.0) throw ValidationError("payoff: rate must be nonnegative");
    }

    Fn f_;
    std::optional<Fn> g_;
    double maturity_;
    double rate_;
    Convention convention_;
};

/// Builds the discounted payoff pair for a built-in spec.
inline GamePayoff build(const PayoffSpec& spec) {
    if (spec.kind == PayoffKind::custom)
        throw ValidationError("payoff: custom kind requires explicit callables");
    if (!(spec.strike > 0.0)) throw ValidationError("payoff: strike must be positive");
    if (!(spec.maturity > 0.0)) throw ValidationError("payoff: maturity must be positive");
    if (spec.rate < 0.0) throw ValidationError("payoff: rate must be nonnegative");
    if (spec.penalty < 0.0) throw ValidationError("payoff: penalty must be nonnegative");

    const bool is_call =
        spec.kind == PayoffKind::game_call || spec.kind == PayoffKind::american_call;
    const double strike = spec.strike;
    const double rate = spec.rate;
    const bool undisc = spec.convention == Convention::undiscounted_strike;

    auto intrinsic = [is_call, strike](double x) {
        return is_call ? std::max(x - strike, 0.0) : std::max(strike - x, 0.0);
    };
    GamePayoff::Fn buyer = [intrinsic, rate, undisc](double t, double s) {
        const double x = undisc ? std::exp(rate * t) * s : s;
        return std::exp(-rate * t) * intrinsic(x);
    };

    if (spec.kind == PayoffKind::american_call || spec.kind == PayoffKind::american_put)
        return GamePayoff(std::move(buyer), spec.maturity, spec.rate, spec.convention);

    const double penalty = spec.penalty;
    GamePayoff::Fn seller = [intrinsic, rate, undisc, penalty](double t, double s) {
        const double x = undisc ? std::exp(rate * t) * s : s;
        return std::exp(-rate * t) * (intrinsic(x) + penalty);
    };
    return GamePayoff(std::move(buyer), std::move(seller), spec.maturity, spec.rate,
                      spec.convention);
}

/// Discounted payment when the seller cancels at gamma and the buyer
/// exercises at tau; ties go to the buyer. s_at_min is the discounted spot
/// at gamma ^ tau.
inline double evaluate_kernel(const GamePayoff& payoff, double gamma, double tau,
                              double s_at_min) {
    if (gamma < tau) return payoff.g(gamma, s_at_min);
    return payoff.f(tau, s_at_min);
}

} // namespace gamelat
