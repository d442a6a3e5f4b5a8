#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "rcm/graph.hpp"
#include "rcm/parallel.hpp"
#include "rcm/replication.hpp"
#include "rcm/stats.hpp"
#include "rcm/theta.hpp"

namespace rcm {

inline double z_score(double diff, double se)
{
    if (se > 0.0) {
        return diff / se;
    }
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

enum class MeckeVariant { PointCount, IsolatedCount };

struct MeckeResult {
    MeckeVariant variant = MeckeVariant::PointCount;
    double lhs = 0.0;
    double lhs_std_error = 0.0;
    double rhs = 0.0;
    double z = 0.0;
    std::uint64_t reps = 0;
};

/// Exact right-hand side of the m = 1 Mecke identity for the chosen variant:
/// λ vol(B) for the point count, λ vol(B) exp(-λ int psi) for isolated points.
inline double mecke_rhs(double lambda, const ConnectionSpec& psi, MeckeVariant variant, const BoxWindow& inner)
{
    const double base = lambda * inner.volume();
    return variant == MeckeVariant::PointCount ? base : base * std::exp(-lambda * integral_psi(psi));
}

/// Compares E[sum over points x in B of h(ξ, x)] with its Mecke integral, for
/// h = 1 (point count) or h = 1{x isolated} (isolated count). The simulation
/// window must contain B dilated by R so every neighborhood is complete.
inline MeckeResult mecke_check(double lambda, const ConnectionSpec& psi, MeckeVariant variant, const BoxWindow& inner,
                               const BoxWindow& window, std::uint64_t reps, std::uint64_t seed,
                               const RunOptions& opts = {})
{
    if (!window.contains(inner.dilated(psi.support_radius()))) {
        throw UsageError("mecke_check: inner box must be inset by at least R from the simulation window");
    }
    if (!(lambda >= 0.0) || reps < 1) {
        throw UsageError("mecke_check: need lambda >= 0 and reps >= 1");
    }
    const auto values = parallel_map(reps, opts.resolved_workers(), [&](std::size_t r) -> std::uint64_t {
        const auto seeds = ReplicationSeeds::of(seed, r);
        const PointSet ps = sample_poisson(window, lambda, seeds.points);
        std::uint64_t count = 0;
        if (variant == MeckeVariant::PointCount) {
            for (const auto& p : ps.points()) {
                count += inner.contains(p.position) ? 1 : 0;
            }
            return count;
        }
        const auto g = build_graph(ps, psi, PairRandomSource(seeds.edges));
        for (std::size_t i = 0; i < g.vertex_count(); ++i) {
            count += (inner.contains(g.points()[i].position) && g.neighbors(i).empty()) ? 1 : 0;
        }
        return count;
    });
    MeanAccumulator acc;
    for (auto v : values) {
        acc.add(static_cast<double>(v));
    }
    MeckeResult out;
    out.variant = variant;
    out.reps = reps;
    out.lhs = acc.mean();
    out.lhs_std_error = acc.stderr_of_mean();
    out.rhs = mecke_rhs(lambda, psi, variant, inner);
    out.z = z_score(out.lhs - out.rhs, out.lhs_std_error);
    return out;
}

struct RussoSide {
    double value = 0.0;
    double std_error = 0.0;
};

struct RussoResult {
    double lambda = 0.0;
    double t = 0.0;
    double dlambda = 0.0;
    RussoSide derivative;
    RussoSide integral;
    double bias_allowance = 0.0;
    double z = 0.0;
};

/// Central finite difference (θ̂_t(λ+dλ) - θ̂_t(λ-dλ)) / 2dλ with shared replication seeds.
inline RussoSide russo_derivative(double lambda, double dlambda, double t, const ConnectionSpec& psi,
                                  std::uint64_t reps, std::uint64_t seed, const RunOptions& opts = {})
{
    if (!(dlambda > 0.0)) {
        throw UsageError("russo_check: dlambda must be positive");
    }
    if (lambda - dlambda < 0.0) {
        throw UsageError("russo_check: lambda - dlambda must be non-negative");
    }
    validate_theta_args(lambda + dlambda, t, reps);
    const auto diffs = parallel_map(reps, opts.resolved_workers(), [&](std::size_t r) -> int {
        const auto seeds = ReplicationSeeds::of(seed, r);
        return static_cast<int>(theta_event(lambda + dlambda, t, psi, seeds)) -
               static_cast<int>(theta_event(lambda - dlambda, t, psi, seeds));
    });
    MeanAccumulator acc;
    for (int v : diffs) {
        acc.add(static_cast<double>(v));
    }
    return {acc.mean() / (2.0 * dlambda), acc.stderr_of_mean() / (2.0 * dlambda)};
}

/// vol(W) * mean of f(ξ^x) - f(ξ) with x uniform in W, for f = 1{o <-> Λ_t^c}.
/// W defaults to Λ_{t+2R}, the region the event lives on.
inline RussoSide russo_integral(double lambda, double t, const ConnectionSpec& psi, std::uint64_t reps,
                                std::uint64_t seed, std::optional<BoxWindow> window = std::nullopt,
                                const RunOptions& opts = {})
{
    validate_theta_args(lambda, t, reps);
    const BoxWindow lives_on = BoxWindow::centered(psi.dimension(), t).dilated(psi.support_radius());
    const BoxWindow w = window.value_or(lives_on);
    if (!w.contains(lives_on)) {
        throw UsageError("russo_check: window must contain the box of side t + 2R");
    }
    const auto diffs = parallel_map(reps, opts.resolved_workers(), [&](std::size_t r) -> int {
        const auto seeds = ReplicationSeeds::of(seed, r);
        SplitMix64 eng(seeds.extra);
        Point x{};
        for (int k = 0; k < psi.dimension(); ++k) {
            x[k] = w.lower(k) + w.side() * uniform01(eng);
        }
        const MarkedPoint inserted = forced_point(2, x);
        return static_cast<int>(theta_event(lambda, t, psi, seeds, std::span<const MarkedPoint>(&inserted, 1))) -
               static_cast<int>(theta_event(lambda, t, psi, seeds));
    });
    MeanAccumulator acc;
    for (int v : diffs) {
        acc.add(static_cast<double>(v));
    }
    return {w.volume() * acc.mean(), w.volume() * acc.stderr_of_mean()};
}

/// Margulis-Russo identity check for θ_t. Both sides are estimated with
/// independent seed streams; the z-score adds a (dλ/λ)^2 relative allowance for
/// the truncation error of the central difference.
inline RussoResult russo_check(double lambda, const ConnectionSpec& psi, double t, std::uint64_t reps,
                               std::uint64_t seed, std::optional<double> dlambda = std::nullopt,
                               std::optional<BoxWindow> window = std::nullopt, const RunOptions& opts = {})
{
    RussoResult out;
    out.lambda = lambda;
    out.t = t;
    out.dlambda = dlambda.value_or(0.05 * lambda);
    out.derivative = russo_derivative(lambda, out.dlambda, t, psi, reps, child_seed(seed, 0), opts);
    out.integral = russo_integral(lambda, t, psi, reps, child_seed(seed, 1), window, opts);
    const double rel = out.dlambda / lambda;
    out.bias_allowance = std::fabs(out.integral.value) * rel * rel;
    const double se = std::sqrt(out.derivative.std_error * out.derivative.std_error +
                                out.integral.std_error * out.integral.std_error +
                                out.bias_allowance * out.bias_allowance);
    out.z = z_score(out.derivative.value - out.integral.value, se);
    return out;
}

} // namespace rcm
