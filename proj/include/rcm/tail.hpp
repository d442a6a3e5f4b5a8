#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcm/explorer.hpp"
#include "rcm/parallel.hpp"
#include "rcm/replication.hpp"
#include "rcm/stats.hpp"
#include "rcm/theta.hpp"

namespace rcm {

/// Observed cluster of the forced origin in one replication.
struct OriginCluster {
    std::uint64_t size = 1;
    /// Some member lies within R of the window boundary, so the true size may be larger.
    bool censored = false;
};

/// Cluster of o in ξ_λ^o sampled in Λ_T; members outside Λ_{T-2R} mark it censored.
inline OriginCluster origin_cluster(double lambda, const ConnectionSpec& psi, double window_side,
                                    const ReplicationSeeds& seeds)
{
    const int d = psi.dimension();
    const BoxWindow window = BoxWindow::centered(d, window_side);
    const BoxWindow interior = window.dilated(-psi.support_radius());
    LazyPoissonField field(window, lambda, seeds.points);
    const MarkedPoint origin = forced_point(1, Point{});
    OriginCluster out;
    const auto members = explore_cluster(
        field, std::span<const MarkedPoint>(&origin, 1), psi, PairRandomSource(seeds.edges),
        [](const MarkedPoint&) { return true; },
        [&](const MarkedPoint& p) {
            if (!interior.contains(p.position)) {
                out.censored = true;
            }
            return true;
        });
    out.size = members.size();
    return out;
}

/// Empirical law of |C_o|: exact counts for uncensored clusters, tail counts including censored ones.
class TailDistribution {
public:
    TailDistribution(double lambda, double window_side, std::vector<std::uint64_t> exact_counts,
                     std::vector<std::uint64_t> censored_counts)
        : lambda_(lambda), window_side_(window_side), exact_(std::move(exact_counts)),
          censored_(std::move(censored_counts))
    {
        const std::size_t len = std::max(exact_.size(), censored_.size());
        exact_.resize(len, 0);
        censored_.resize(len, 0);
        if (len > 0 && (exact_[0] != 0 || censored_[0] != 0)) {
            throw UsageError("TailDistribution: cluster sizes start at 1");
        }
        cumulative_.assign(len + 1, 0);
        for (std::size_t n = len; n-- > 0;) {
            cumulative_[n] = cumulative_[n + 1] + exact_[n] + censored_[n];
        }
        reps_ = len > 1 ? cumulative_[1] : 0;
    }

    static TailDistribution from_clusters(double lambda, double window_side, std::span<const OriginCluster> obs)
    {
        std::vector<std::uint64_t> exact{0};
        std::vector<std::uint64_t> cens{0};
        for (const auto& c : obs) {
            if (c.size >= exact.size()) {
                exact.resize(c.size + 1, 0);
                cens.resize(c.size + 1, 0);
            }
            ++(c.censored ? cens : exact)[c.size];
        }
        return TailDistribution(lambda, window_side, std::move(exact), std::move(cens));
    }

    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] double window_side() const noexcept { return window_side_; }
    [[nodiscard]] std::uint64_t reps() const noexcept { return reps_; }
    /// Largest observed size.
    [[nodiscard]] std::size_t max_size() const noexcept { return exact_.empty() ? 0 : exact_.size() - 1; }

    /// # replications with |C_o| = n, uncensored.
    [[nodiscard]] std::uint64_t exact_count(std::size_t n) const noexcept { return n < exact_.size() ? exact_[n] : 0; }
    [[nodiscard]] std::uint64_t censored_count(std::size_t n) const noexcept
    {
        return n < censored_.size() ? censored_[n] : 0;
    }
    [[nodiscard]] std::uint64_t censored() const noexcept
    {
        std::uint64_t s = 0;
        for (auto c : censored_) {
            s += c;
        }
        return s;
    }
    /// # replications with |C_o| >= n (censored clusters counted at their observed size).
    [[nodiscard]] std::uint64_t at_least(std::size_t n) const noexcept
    {
        if (n == 0) {
            return reps_;
        }
        return n < cumulative_.size() ? cumulative_[n] : 0;
    }

    [[nodiscard]] double exact_frequency(std::size_t n) const noexcept
    {
        return reps_ ? static_cast<double>(exact_count(n)) / static_cast<double>(reps_) : 0.0;
    }
    [[nodiscard]] double tail_frequency(std::size_t n) const noexcept
    {
        return reps_ ? static_cast<double>(at_least(n)) / static_cast<double>(reps_) : 0.0;
    }

private:
    double lambda_;
    double window_side_;
    std::vector<std::uint64_t> exact_;
    std::vector<std::uint64_t> censored_;
    std::vector<std::uint64_t> cumulative_;
    std::uint64_t reps_ = 0;
};

inline TailDistribution estimate_cluster_tail(double lambda, const ConnectionSpec& psi, double window_side,
                                              std::uint64_t reps, std::uint64_t seed, const RunOptions& opts = {})
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw UsageError("estimate_cluster_tail: lambda must be finite and non-negative");
    }
    if (!(window_side >= 4.0 * psi.support_radius())) {
        throw UsageError("estimate_cluster_tail: window side must be at least 4R");
    }
    if (reps < 1) {
        throw UsageError("estimate_cluster_tail: reps must be at least 1");
    }
    const auto obs = parallel_map(reps, opts.resolved_workers(), [&](std::size_t r) {
        return origin_cluster(lambda, psi, window_side, ReplicationSeeds::of(seed, r));
    });
    return TailDistribution::from_clusters(lambda, window_side, obs);
}

inline constexpr std::uint64_t kTailCountFloor = 30;
inline constexpr std::size_t kDefaultZetaNMin = 5;

struct QDiagnostic {
    std::size_t n = 0;
    /// (P[|C_o| = n] / P[n <= |C_o| < inf])^{1/n}
    double q = 0.0;
};

struct ZetaEstimate {
    double zeta = 0.0;
    double std_error = 0.0;
    std::size_t n_min = 0;
    std::size_t n_max = 0;
    double rho = 0.0;
    double r2 = 0.0;
    double intercept = 0.0;
    std::vector<QDiagnostic> q;
    /// Slope of -log P̂[|C_o| = n]; diagnostic only (NaN when it cannot be formed).
    double zeta_exact_form = std::nan("");
};

/// Largest n with at_least(n) >= floor (0 if none).
inline std::size_t default_zeta_n_max(const TailDistribution& tail, std::uint64_t floor = kTailCountFloor)
{
    std::size_t n = 0;
    for (std::size_t k = 1; k <= tail.max_size(); ++k) {
        if (tail.at_least(k) >= floor) {
            n = k;
        }
    }
    return n;
}

/// Fits ζ as the slope of -log P̂[|C_o| >= n] against n on [n_min, n_max].
///
/// Point estimate: weighted least squares with inverse delta-method variances
/// v_n = (1 - F_n)/(N F_n). Standard error: sandwich sum_ij c_i c_j v_{min(n_i, n_j)},
/// the exact delta-method covariance of nested tail frequencies.
inline ZetaEstimate fit_zeta(const TailDistribution& tail, std::size_t n_min = kDefaultZetaNMin,
                             std::optional<std::size_t> n_max = std::nullopt)
{
    if (n_min < 1) {
        throw UsageError("fit_zeta: n_min must be at least 1");
    }
    const std::size_t hi = n_max.value_or(default_zeta_n_max(tail));
    if (tail.at_least(hi) < kTailCountFloor || hi == 0) {
        throw EstimationError("fit_zeta: tail count at n = " + std::to_string(hi) + " is " +
                              std::to_string(tail.at_least(hi)) + " < " + std::to_string(kTailCountFloor));
    }
    if (hi < n_min + 2) {
        throw EstimationError("fit_zeta: fit range [" + std::to_string(n_min) + ", " + std::to_string(hi) +
                              "] has fewer than 3 sizes");
    }
    const double reps = static_cast<double>(tail.reps());
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w;
    std::vector<double> v;
    for (std::size_t n = n_min; n <= hi; ++n) {
        const double f = tail.tail_frequency(n);
        const double var = std::max(1.0 - f, 1.0 / reps) / (reps * f);
        x.push_back(static_cast<double>(n));
        y.push_back(-std::log(f));
        w.push_back(1.0 / var);
        v.push_back(var);
    }
    const auto fit = weighted_line_fit(x, y, w);
    double var_slope = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            var_slope += fit.coefficients[i] * fit.coefficients[j] * v[std::min(i, j)];
        }
    }

    ZetaEstimate out;
    out.zeta = fit.slope;
    out.std_error = std::sqrt(var_slope);
    out.n_min = n_min;
    out.n_max = hi;
    out.r2 = fit.r2;
    out.intercept = fit.intercept;
    out.rho = std::exp(-fit.slope);
    if (!(out.zeta > 0.0)) {
        throw EstimationError("fit_zeta: fitted rate " + std::to_string(out.zeta) +
                              " is not positive; the tail does not look subcritical");
    }
    std::vector<double> xe;
    std::vector<double> ye;
    std::vector<double> we;
    for (std::size_t n = n_min; n <= hi; ++n) {
        const auto c = tail.exact_count(n);
        if (c == 0) {
            continue;
        }
        out.q.push_back({n, std::pow(static_cast<double>(c) / static_cast<double>(tail.at_least(n)),
                                     1.0 / static_cast<double>(n))});
        xe.push_back(static_cast<double>(n));
        ye.push_back(-std::log(static_cast<double>(c) / reps));
        we.push_back(static_cast<double>(c));
    }
    if (xe.size() >= 2) {
        out.zeta_exact_form = weighted_line_fit(xe, ye, we).slope;
    }
    return out;
}

struct SupermultiplicativityResult {
    std::size_t n = 0;
    std::size_t m = 0;
    /// p̂_{n+1} p̂_{m+1}
    double product = 0.0;
    /// p̂_{n+m+1}
    double joint = 0.0;
    double std_error = 0.0;
    bool skipped = false;
    bool violated = false;
};

/// One-sided check of p_{n+1} p_{m+1} <= p_{n+m+1}: a violation is reported when the
/// excess product - joint exceeds 3 standard errors (multinomial delta method).
inline std::vector<SupermultiplicativityResult>
supermultiplicativity_check(const TailDistribution& tail, std::span<const std::pair<std::size_t, std::size_t>> pairs,
                            double sigmas = 3.0)
{
    std::vector<SupermultiplicativityResult> out;
    const double reps = static_cast<double>(tail.reps());
    for (const auto& [n, m] : pairs) {
        SupermultiplicativityResult res;
        res.n = n;
        res.m = m;
        const std::size_t a = n + 1;
        const std::size_t b = m + 1;
        const std::size_t c = n + m + 1;
        if (tail.exact_count(a) < kTailCountFloor || tail.exact_count(b) < kTailCountFloor ||
            tail.exact_count(c) < kTailCountFloor) {
            res.skipped = true;
            out.push_back(res);
            continue;
        }
        const double pa = tail.exact_frequency(a);
        const double pb = tail.exact_frequency(b);
        const double pc = tail.exact_frequency(c);
        res.product = pa * pb;
        res.joint = pc;
        // gradient of g = p_a p_b - p_c over the distinct sizes involved
        std::vector<std::pair<std::size_t, double>> grad;
        auto add = [&](std::size_t k, double g) {
            for (auto& [kk, gg] : grad) {
                if (kk == k) {
                    gg += g;
                    return;
                }
            }
            grad.emplace_back(k, g);
        };
        add(a, pb);
        add(b, pa);
        add(c, -1.0);
        double var = 0.0;
        for (const auto& [k1, g1] : grad) {
            for (const auto& [k2, g2] : grad) {
                const double p1 = tail.exact_frequency(k1);
                const double p2 = tail.exact_frequency(k2);
                const double cov = (k1 == k2 ? p1 * (1.0 - p1) : -p1 * p2) / reps;
                var += g1 * g2 * cov;
            }
        }
        res.std_error = std::sqrt(std::max(0.0, var));
        res.violated = res.product - res.joint > sigmas * res.std_error;
        out.push_back(res);
    }
    return out;
}

} // namespace rcm
