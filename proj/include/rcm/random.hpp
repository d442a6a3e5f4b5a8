#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "rcm/errors.hpp"

namespace rcm {

/// SplitMix64 output function (Stafford variant 13). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31U);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Seed of the `index`-th child stream of `master`. Used for replication seeds.
constexpr std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix64(mix64(master + kGoldenGamma) ^ mix64((index + 1) * kGoldenGamma));
}

/// Small sequential generator satisfying UniformRandomBitGenerator. Output is
/// bit-identical on every platform, unlike the std distributions layered on it.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

/// Top 53 bits of a word mapped to [0, 1).
constexpr double to_unit_interval(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11U) * 0x1.0p-53;
}

template <class Engine>
double uniform01(Engine& eng)
{
    return to_unit_interval(eng());
}

/// Exp(1) by inversion.
template <class Engine>
double standard_exponential(Engine& eng)
{
    return -std::log1p(-uniform01(eng));
}

/// Poisson variate. Sequential inversion for small means, PTRS (Hörmann 1993) otherwise.
template <class Engine>
std::uint64_t poisson(Engine& eng, double mean)
{
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw UsageError("poisson: mean must be finite and non-negative");
    }
    if (mean == 0.0) {
        return 0;
    }
    if (mean < 10.0) {
        double p = std::exp(-mean);
        double cdf = p;
        const double u = uniform01(eng);
        std::uint64_t k = 0;
        while (u > cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
            if (p < 1e-300 && cdf < u) {
                // numeric floor reached; cdf cannot advance further
                break;
            }
        }
        return k;
    }

    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform01(eng) - 0.5;
        const double v = uniform01(eng);
        const double us = 0.5 - std::fabs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) {
            return static_cast<std::uint64_t>(kd);
        }
        if (kd < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
        const double rhs = -mean + kd * loglam - std::lgamma(kd + 1.0);
        if (lhs <= rhs) {
            return static_cast<std::uint64_t>(kd);
        }
    }
}

/// Deterministic uniform mark for every unordered pair of point ids.
///
/// Stream derivation (bit-exact):
///   lo, hi = min(id_i, id_j), max(id_i, id_j) reinterpreted as uint64
///   h = mix64(seed + 0x6A09E667F3BCC909)
///   h = mix64(h ^ lo)
///   h = mix64(h + hi * 0x9E3779B97F4A7C15)
///   u = (h >> 11) * 2^-53
/// The value for a pair depends only on the seed and the two ids, so adding
/// points never changes marks of existing pairs.
class PairRandomSource {
public:
    constexpr explicit PairRandomSource(std::uint64_t master_seed) noexcept : seed_(master_seed) {}

    [[nodiscard]] constexpr std::uint64_t master_seed() const noexcept { return seed_; }

    [[nodiscard]] double uniform(std::int64_t id_i, std::int64_t id_j) const
    {
        if (id_i == id_j) {
            throw UsageError("pair_uniform: identical ids (self-loops are not marked)");
        }
        return uniform_unchecked(id_i, id_j);
    }

    [[nodiscard]] constexpr double uniform_unchecked(std::int64_t id_i, std::int64_t id_j) const noexcept
    {
        const auto lo = static_cast<std::uint64_t>(id_i < id_j ? id_i : id_j);
        const auto hi = static_cast<std::uint64_t>(id_i < id_j ? id_j : id_i);
        std::uint64_t h = mix64(seed_ + 0x6A09E667F3BCC909ULL);
        h = mix64(h ^ lo);
        h = mix64(h + hi * kGoldenGamma);
        return to_unit_interval(h);
    }

private:
    std::uint64_t seed_;
};

/// U_{i,j} for the unordered pair {id_i, id_j}; usage error when the ids coincide.
inline double pair_uniform(const PairRandomSource& src, std::int64_t id_i, std::int64_t id_j)
{
    return src.uniform(id_i, id_j);
}

} // namespace rcm
