#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rcm/connection.hpp"
#include "rcm/errors.hpp"
#include "rcm/random.hpp"

namespace rcm {

/// Galton-Watson tree with Poisson(alpha) offspring, alpha = lambda * int psi.
struct GWSpec {
    double alpha = 0.0;

    explicit GWSpec(double a) : alpha(a)
    {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw UsageError("GWSpec: offspring mean must be finite and non-negative");
        }
    }
    static GWSpec matched(double lambda, const ConnectionSpec& psi) { return GWSpec(lambda * integral_psi(psi)); }
    [[nodiscard]] bool subcritical() const noexcept { return alpha < 1.0; }
};

/// P[|tau| = k] = e^{-k alpha} (k alpha)^{k-1} / k!  (Borel law, from Dwass' formula).
inline double borel_pmf(double alpha, std::uint64_t k)
{
    if (k == 0) {
        throw UsageError("borel_pmf: total progeny is at least 1");
    }
    if (!(alpha >= 0.0)) {
        throw UsageError("borel_pmf: alpha must be non-negative");
    }
    if (alpha == 0.0) {
        return k == 1 ? 1.0 : 0.0;
    }
    const double kd = static_cast<double>(k);
    const double log_pmf = -kd * alpha + (kd - 1.0) * std::log(kd * alpha) - std::lgamma(kd + 1.0);
    return std::exp(log_pmf);
}

/// Closed-form bound P[|tau| >= k] <= (e^{1-alpha} alpha)^k / (alpha (1 - e^{1-alpha} alpha)).
inline double gw_tail_bound(double alpha, std::uint64_t k)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("gw_tail_bound: requires 0 < alpha < 1");
    }
    const double base = std::exp(1.0 - alpha) * alpha;
    return std::pow(base, static_cast<double>(k)) / (alpha * (1.0 - base));
}

/// Lower bound -(1 - alpha + log alpha) on the correlation length implied by the tail bound.
inline double gw_zeta_lower_bound(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("gw_zeta_lower_bound: requires 0 < alpha < 1");
    }
    return -(1.0 - alpha + std::log(alpha));
}

struct GWProgeny {
    std::uint64_t count = 1;
    /// The tree reached the cap; `count` is then a lower bound.
    bool censored = false;
};

inline constexpr std::uint64_t kGWProgenyCap = 1'000'000;

/// Total progeny of one Poisson(alpha) Galton-Watson tree, capped at kGWProgenyCap.
inline GWProgeny simulate_gw_progeny(double alpha, std::uint64_t seed, std::uint64_t cap = kGWProgenyCap)
{
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw UsageError("simulate_gw_progeny: alpha must be finite and non-negative");
    }
    SplitMix64 eng(seed);
    GWProgeny out;
    std::uint64_t pending = 1;
    while (pending > 0) {
        --pending;
        const std::uint64_t kids = poisson(eng, alpha);
        out.count += kids;
        pending += kids;
        if (out.count >= cap) {
            out.count = cap;
            out.censored = true;
            break;
        }
    }
    return out;
}

/// Exact small-cluster probabilities p_n = P[|C_o| = n].
struct ExactSmallClusterOracle {
    ConnectionSpec psi;
    double lambda = 0.0;
    double tolerance = 1e-12;

    /// Isolation probability p_1 = exp(-lambda int psi).
    [[nodiscard]] double p1() const
    {
        if (!(lambda >= 0.0)) {
            throw UsageError("exact_p1: lambda must be non-negative");
        }
        return std::exp(-lambda * integral_psi(psi));
    }

    /// p_2 = lambda int psi(x) exp(-lambda int g1(z; o, x) dz) dx for the Boolean disk, where
    /// int g1(z; o, x) dz = 2 p V_d(r) - p^2 A_d(|x|) and A_d is the ball intersection volume.
    /// The angular integral is done in closed form; the radial one by adaptive Gauss-Kronrod.
    [[nodiscard]] double p2() const
    {
        if (psi.kind() != ConnectionSpec::Kind::BooleanDisk) {
            throw UnsupportedFeature("exact_p2: only the BooleanDisk connection function is supported");
        }
        if (!(lambda >= 0.0)) {
            throw UsageError("exact_p2: lambda must be non-negative");
        }
        const double p = psi.p();
        const double r = psi.support_radius();
        const int d = psi.dimension();
        if (lambda == 0.0 || p == 0.0) {
            return 0.0;
        }
        const double vol = ball_volume(d, r);
        auto integrand = [&](double s) {
            const double reach = 2.0 * p * vol - p * p * ball_intersection_volume(d, r, s);
            return std::pow(s, d - 1) * std::exp(-lambda * reach);
        };
        double err = 0.0;
        const double radial =
            boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, r, 20, tolerance, &err);
        return lambda * p * unit_sphere_area(d) * radial;
    }
};

inline double exact_p1(double lambda, const ConnectionSpec& psi) { return ExactSmallClusterOracle{psi, lambda}.p1(); }
inline double exact_p2(double lambda, const ConnectionSpec& psi) { return ExactSmallClusterOracle{psi, lambda}.p2(); }

} // namespace rcm
