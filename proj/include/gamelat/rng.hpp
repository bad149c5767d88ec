#pragma once

#include <cmath>
#include <cstdint>

namespace gamelat {

// SplitMix64 with per-stream phase offsets.
//
// This is the repo's fixed Monte Carlo generator: the output sequence is a
// pure function of (seed, stream) using only 64-bit integer arithmetic, so
// results are identical on every platform. Stream s walks the Weyl sequence
// state += 0x9e3779b97f4a7c15 starting from mix(seed + (s+1)*0x9e3779b97f4a7c15);
// path p of a simulation always uses stream p, which makes serial and
// parallel runs agree draw for draw.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(seed + kGamma * (stream + 1))) {}

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix(state_);
    }

    /// Uniform draw in (0, 1].
    double next_uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (two uniforms per draw, none cached).
    double next_normal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace gamelat
