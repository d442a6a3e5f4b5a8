#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rcm/explorer.hpp"
#include "rcm/parallel.hpp"
#include "rcm/replication.hpp"
#include "rcm/stats.hpp"

namespace rcm {

struct ThetaEstimate {
    double lambda = 0.0;
    double t = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t hits = 0;
    double estimate = 0.0;
    Interval wilson95;
};

inline MarkedPoint forced_point(std::int64_t reserved_index, const Point& position)
{
    return MarkedPoint{PointId{-reserved_index}, position, 0.0};
}

/// One replication of {o <-> Λ_t^c in ξ_λ^o}, sampled in Λ_{t+2R}.
///
/// `extra` points are forced in addition to the origin (ids -2, -3, ...).
inline bool theta_event(double lambda, double t, const ConnectionSpec& psi, const ReplicationSeeds& seeds,
                        std::span<const MarkedPoint> extra = {})
{
    const int d = psi.dimension();
    const BoxWindow target = BoxWindow::centered(d, t);
    LazyPoissonField field(target.dilated(psi.support_radius()), lambda, seeds.points);
    std::vector<MarkedPoint> forced{forced_point(1, Point{})};
    forced.insert(forced.end(), extra.begin(), extra.end());
    bool hit = false;
    explore_cluster(field, forced, psi, PairRandomSource(seeds.edges), [](const MarkedPoint&) { return true; },
                    [&](const MarkedPoint& p) {
                        if (!target.contains(p.position)) {
                            hit = true;
                            return false;
                        }
                        return true;
                    });
    return hit;
}

inline void validate_theta_args(double lambda, double t, std::uint64_t reps)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw UsageError("estimate_theta: lambda must be finite and non-negative");
    }
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw UsageError("estimate_theta: t must be positive");
    }
    if (reps < 1) {
        throw UsageError("estimate_theta: reps must be at least 1");
    }
}

/// Monte Carlo t-percolation probability θ_t(λ).
inline ThetaEstimate estimate_theta(double lambda, double t, const ConnectionSpec& psi, std::uint64_t reps,
                                    std::uint64_t seed, const RunOptions& opts = {})
{
    validate_theta_args(lambda, t, reps);
    const auto hits = parallel_map(reps, opts.resolved_workers(), [&](std::size_t r) -> std::uint8_t {
        return theta_event(lambda, t, psi, ReplicationSeeds::of(seed, r)) ? 1 : 0;
    });
    ThetaEstimate est;
    est.lambda = lambda;
    est.t = t;
    est.reps = reps;
    for (auto h : hits) {
        est.hits += h;
    }
    est.estimate = static_cast<double>(est.hits) / static_cast<double>(reps);
    est.wilson95 = wilson_interval(est.hits, reps);
    return est;
}

/// One (t, θ̂_t) observation for a decay fit.
struct DecayPoint {
    double t = 0.0;
    double frequency = 0.0;
    std::uint64_t reps = 0;
};

struct DecayRateEstimate {
    double rate = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<DecayPoint> used;
    std::vector<ThetaEstimate> thetas;

    /// Lower end of the two-sided 95% interval on the rate.
    [[nodiscard]] double lower95() const noexcept { return rate - kZ95 * std_error; }
};

/// Weighted least-squares slope of -log θ̂_t against t.
///
/// Points with zero hits are dropped (the fit range shrinks). Weights are the
/// inverse delta-method variances (1 - θ)/(reps θ) of log θ̂.
inline DecayRateEstimate fit_decay_rate(std::span<const DecayPoint> points)
{
    DecayRateEstimate out;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w;
    for (const auto& p : points) {
        if (!(p.frequency > 0.0) || p.reps == 0) {
            continue;
        }
        const double n = static_cast<double>(p.reps);
        const double var = std::max(1.0 - p.frequency, 1.0 / n) / (n * p.frequency);
        x.push_back(p.t);
        y.push_back(-std::log(p.frequency));
        w.push_back(1.0 / var);
        out.used.push_back(p);
    }
    if (x.size() < 3) {
        throw EstimationError("decay_rate_theta: fewer than 3 t values with nonzero hits");
    }
    const auto fit = weighted_line_fit(x, y, w);
    out.rate = fit.slope;
    out.std_error = fit.slope_se;
    out.intercept = fit.intercept;
    out.r2 = fit.r2;
    return out;
}

/// Exponential decay rate of θ_t(λ) over an increasing t grid; independent seeds per t.
inline DecayRateEstimate decay_rate_theta(double lambda, const ConnectionSpec& psi, std::span<const double> t_grid,
                                          std::uint64_t reps, std::uint64_t seed, const RunOptions& opts = {})
{
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > t_grid[i - 1])) {
            throw UsageError("decay_rate_theta: t grid must be strictly increasing");
        }
    }
    std::vector<ThetaEstimate> thetas;
    std::vector<DecayPoint> points;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        thetas.push_back(estimate_theta(lambda, t_grid[k], psi, reps, child_seed(seed, k), opts));
        points.push_back({t_grid[k], thetas.back().estimate, reps});
    }
    auto out = fit_decay_rate(points);
    out.thetas = std::move(thetas);
    return out;
}

} // namespace rcm
