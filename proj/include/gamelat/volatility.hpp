#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "gamelat/errors.hpp"

namespace gamelat {

// Local-volatility function sigma(s) together with certified bounds
// 0 < sigma_min <= sigma(s) <= sigma_max. The upper bound sets the lattice
// spacing, so the declared bounds are re-checked on every evaluation and a
// violation aborts the run. Lipschitz continuity of z -> sigma(e^z) is a
// user obligation for custom models; it is not verified numerically.
class VolatilityModel {
public:
    VolatilityModel(std::function<double(double)> sigma, double sigma_min,
                    double sigma_max, std::string description)
        : sigma_(std::move(sigma)),
          sigma_min_(sigma_min),
          sigma_max_(sigma_max),
          description_(std::move(description)) {
        if (!(sigma_min_ > 0.0))
            throw ValidationError("volatility: sigma_min must be positive");
        if (!(sigma_max_ >= sigma_min_) || !std::isfinite(sigma_max_))
            throw ValidationError("volatility: need sigma_min <= sigma_max < inf");
    }

    /// Volatility at spot price s > 0.
    double sigma(double s) const {
        const double v = sigma_(s);
        check(v, s);
        return v;
    }

    /// Log-space volatility psi(z) = sigma(e^z).
    double psi(double z) const {
        const double v = sigma_(std::exp(z));
        check(v, std::exp(z));
        return v;
    }

    double sigma_min() const { return sigma_min_; }
    double sigma_max() const { return sigma_max_; }
    const std::string& description() const { return description_; }

private:
    void check(double v, double s) const {
        if (!(v >= sigma_min_ && v <= sigma_max_))
            throw BoundViolation("volatility '" + description_ +
                                 "': sigma(" + std::to_string(s) + ") = " +
                                 std::to_string(v) + " outside declared bounds [" +
                                 std::to_string(sigma_min_) + ", " +
                                 std::to_string(sigma_max_) + "]");
    }

    std::function<double(double)> sigma_;
    double sigma_min_;
    double sigma_max_;
    std::string description_;
};

/// sigma(s) = min(0.5, max(0.05, sqrt(s)/30)), a truncated CEV profile.
inline VolatilityModel make_truncated_cev() {
    return VolatilityModel(
        [](double s) { return std::min(0.5, std::max(0.05, std::sqrt(s) / 30.0)); },
        0.05, 0.5, "truncated_cev");
}

/// Constant volatility; reduces the trinomial tree to a binomial one.
inline VolatilityModel make_constant(double sigma_value) {
    if (!(sigma_value > 0.0) || !std::isfinite(sigma_value))
        throw ValidationError("constant volatility must be positive and finite");
    return VolatilityModel([sigma_value](double) { return sigma_value; },
                           sigma_value, sigma_value, "constant");
}

} // namespace gamelat
