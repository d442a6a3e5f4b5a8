#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcm/graph.hpp"
#include "rcm/parallel.hpp"
#include "rcm/replication.hpp"
#include "rcm/stats.hpp"
#include "rcm/tail.hpp"

namespace rcm {

struct L1Row {
    double s = 0.0;
    std::uint64_t reps = 0;
    double mean_size = 0.0;
    double std_error = 0.0;
    /// mean |L1| / log s
    double ratio = 0.0;
    double ratio_std_error = 0.0;
};

struct L1ScalingOptions {
    /// Side of the window used by the companion tail run; 0 selects 60 R.
    double tail_window = 0.0;
    std::uint64_t tail_reps = 100'000;
    std::size_t n_min = kDefaultZetaNMin;
};

struct L1ScalingReport {
    double lambda = 0.0;
    int dimension = 0;
    std::vector<L1Row> rows;
    std::optional<ZetaEstimate> zeta;
    /// Why `zeta` is missing, if it is.
    std::string zeta_error;
    /// d / ζ̂ (NaN without a valid fit).
    double reference = std::nan("");
    double reference_std_error = std::nan("");

    /// (max ratio - min ratio) / mean ratio across the s grid.
    [[nodiscard]] double relative_spread() const
    {
        if (rows.empty()) {
            return 0.0;
        }
        double lo = rows.front().ratio;
        double hi = lo;
        double sum = 0.0;
        for (const auto& r : rows) {
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
            sum += r.ratio;
        }
        const double mean = sum / static_cast<double>(rows.size());
        return mean > 0.0 ? (hi - lo) / mean : 0.0;
    }
};

/// |L1(ξ_λ ∩ Λ_s)| for one replication.
inline std::uint64_t largest_component_size(double lambda, const ConnectionSpec& psi, double s,
                                            const ReplicationSeeds& seeds)
{
    const BoxWindow box = BoxWindow::centered(psi.dimension(), s);
    auto ps = std::make_shared<const PointSet>(sample_poisson(box, lambda, seeds.points));
    const auto g = build_graph(std::move(ps), psi, PairRandomSource(seeds.edges));
    return largest_component(g, box).size;
}

/// Largest-component scaling table over an increasing s grid, with shared
/// replication seeds across s, plus the reference d/ζ̂ from an independent tail run.
inline L1ScalingReport l1_scaling(double lambda, const ConnectionSpec& psi, std::span<const double> s_grid,
                                  std::uint64_t reps, std::uint64_t seed, const L1ScalingOptions& lopts = {},
                                  const RunOptions& opts = {})
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw UsageError("l1_scaling: lambda must be finite and non-negative");
    }
    if (reps < 1 || s_grid.empty()) {
        throw UsageError("l1_scaling: need reps >= 1 and a nonempty s grid");
    }
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        if (!(s_grid[i] > 1.0) || (i > 0 && !(s_grid[i] > s_grid[i - 1]))) {
            throw UsageError("l1_scaling: s grid must be increasing and > 1");
        }
    }
    L1ScalingReport report;
    report.lambda = lambda;
    report.dimension = psi.dimension();
    for (double s : s_grid) {
        const auto sizes = parallel_map(reps, opts.resolved_workers(), [&](std::size_t r) {
            return largest_component_size(lambda, psi, s, ReplicationSeeds::of(seed, r));
        });
        MeanAccumulator acc;
        for (auto v : sizes) {
            acc.add(static_cast<double>(v));
        }
        const double logs = std::log(s);
        report.rows.push_back({s, reps, acc.mean(), acc.stderr_of_mean(), acc.mean() / logs,
                               acc.stderr_of_mean() / logs});
    }

    const double tail_window = lopts.tail_window > 0.0 ? lopts.tail_window : 60.0 * psi.support_radius();
    const auto tail =
        estimate_cluster_tail(lambda, psi, tail_window, lopts.tail_reps, child_seed(seed, 0x7A11ULL), opts);
    try {
        report.zeta = fit_zeta(tail, lopts.n_min);
        report.reference = psi.dimension() / report.zeta->zeta;
        report.reference_std_error = report.reference * report.zeta->std_error / report.zeta->zeta;
    } catch (const EstimationError& e) {
        report.zeta_error = e.what();
    }
    return report;
}

} // namespace rcm
