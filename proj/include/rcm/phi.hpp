#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "rcm/explorer.hpp"
#include "rcm/parallel.hpp"
#include "rcm/replication.hpp"
#include "rcm/stats.hpp"
#include "rcm/thinning.hpp"
#include "rcm/theta.hpp"

namespace rcm {

struct PhiEstimate {
    double lambda = 0.0;
    ThinningFunctionSpec thinning;
    std::uint64_t reps = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    Interval ci95;
};

/// Smallest admissible simulation window for φ_λ(f): the origin-centered hull of
/// supp f dilated by 2R.
inline BoxWindow phi_window(const ThinningFunctionSpec& f, const ConnectionSpec& psi)
{
    return centered_hull(f.support()).dilated(2.0 * psi.support_radius());
}

/// One replication of the φ_λ(f) integrand: the number of points of P_λ removed by
/// the f-thinning that have an edge into C(o, ξ[f_*P_λ ∪ {o}]).
inline std::uint64_t phi_count(double lambda, const ThinningFunctionSpec& f, const ConnectionSpec& psi,
                               const BoxWindow& window, const ReplicationSeeds& seeds)
{
    if (lambda == 0.0) {
        return 0;
    }
    LazyPoissonField field(window, lambda, seeds.points);
    const PairRandomSource src(seeds.edges);
    const MarkedPoint origin = forced_point(1, Point{});
    auto retained = [&](const MarkedPoint& p) { return survives_thinning(p, f, lambda); };
    const auto cluster = explore_cluster(field, std::span<const MarkedPoint>(&origin, 1), psi, src, retained,
                                         [](const MarkedPoint&) { return true; });
    std::unordered_set<std::int64_t> reached;
    for (const auto& m : cluster) {
        field.for_each_near(m.position, psi.support_radius(), [&](const MarkedPoint& y) {
            if (!retained(y) && !reached.contains(y.id.value) && connected(m, y, psi, src)) {
                reached.insert(y.id.value);
            }
        });
    }
    return reached.size();
}

/// Monte Carlo φ_λ(f) with a normal 95% interval.
inline PhiEstimate estimate_phi(double lambda, const ThinningFunctionSpec& f, const ConnectionSpec& psi,
                                std::uint64_t reps, std::uint64_t seed, std::optional<BoxWindow> window = std::nullopt,
                                const RunOptions& opts = {})
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw UsageError("estimate_phi: lambda must be finite and non-negative");
    }
    if (f.dimension() != psi.dimension()) {
        throw UsageError("estimate_phi: thinning and connection dimensions differ");
    }
    if (reps < 1) {
        throw UsageError("estimate_phi: reps must be at least 1");
    }
    const BoxWindow needed = phi_window(f, psi);
    const BoxWindow w = window.value_or(needed);
    if (!w.contains(needed)) {
        throw UsageError("estimate_phi: window must contain the support of f and the origin dilated by 2R");
    }
    const auto counts = parallel_map(reps, opts.resolved_workers(), [&](std::size_t r) {
        return phi_count(lambda, f, psi, w, ReplicationSeeds::of(seed, r));
    });
    MeanAccumulator acc;
    for (auto c : counts) {
        acc.add(static_cast<double>(c));
    }
    PhiEstimate est{lambda, f, reps, acc.mean(), acc.stderr_of_mean(), {}};
    est.ci95 = {std::max(0.0, est.estimate - kZ95 * est.std_error), est.estimate + kZ95 * est.std_error};
    return est;
}

struct CriticalBoundRow {
    PhiEstimate phi;
    /// Upper end of the 95% interval is below 1.
    bool certified = false;
};

/// Statistical lower bounds on λ_c. A certified λ is a confidence statement
/// (95% interval on φ̂ below 1), not a proof.
struct CriticalBoundReport {
    ConnectionSpec psi;
    /// 1 / int psi (infinite when psi = 0).
    double analytic_bound = 0.0;
    std::vector<CriticalBoundRow> rows;
    /// Largest certified λ, if any.
    std::optional<double> best_certified;

    [[nodiscard]] double best_lower_bound() const noexcept
    {
        return best_certified ? std::max(analytic_bound, *best_certified) : analytic_bound;
    }
};

inline double analytic_lambda_c_bound(const ConnectionSpec& psi)
{
    const double mass = integral_psi(psi);
    return mass > 0.0 ? 1.0 / mass : std::numeric_limits<double>::infinity();
}

inline CriticalBoundReport lambda_c_bounds(const ConnectionSpec& psi, std::span<const double> lambda_grid,
                                           std::span<const ThinningFunctionSpec> family, std::uint64_t reps,
                                           std::uint64_t seed, const RunOptions& opts = {})
{
    if (lambda_grid.empty() || family.empty()) {
        throw UsageError("lambda_c_bounds: lambda grid and thinning family must be nonempty");
    }
    CriticalBoundReport report{psi, analytic_lambda_c_bound(psi), {}, std::nullopt};
    std::uint64_t row = 0;
    for (double lambda : lambda_grid) {
        for (const auto& f : family) {
            auto est = estimate_phi(lambda, f, psi, reps, child_seed(seed, row++), std::nullopt, opts);
            const bool ok = est.ci95.hi < 1.0;
            if (ok && (!report.best_certified || lambda > *report.best_certified)) {
                report.best_certified = lambda;
            }
            report.rows.push_back({std::move(est), ok});
        }
    }
    return report;
}

} // namespace rcm
