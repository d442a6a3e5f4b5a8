#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rcm/connection.hpp"
#include "rcm/graph.hpp"
#include "rcm/sampler.hpp"

namespace rcm {

/// On-demand view of sample_poisson(window, lambda, seed): a lattice cell is
/// generated the first time it is touched. Produces exactly the points (ids,
/// positions, marks) the eager sampler would, so cluster statistics computed by
/// local exploration agree with those of a fully built graph.
class LazyPoissonField {
public:
    LazyPoissonField(const BoxWindow& window, double lambda, std::uint64_t seed)
        : window_(window), lambda_(lambda), seed_(seed)
    {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw UsageError("LazyPoissonField: lambda must be finite and non-negative");
        }
        for (int k = 0; k < window.dimension(); ++k) {
            lo_[k] = static_cast<std::int64_t>(std::floor(window.lower(k)));
            hi_[k] = static_cast<std::int64_t>(std::floor(window.upper(k)));
        }
    }

    [[nodiscard]] const BoxWindow& window() const noexcept { return window_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }

    const std::vector<MarkedPoint>& cell(const CellCoord& c)
    {
        const int d = window_.dimension();
        const std::uint64_t key = detail::pack_cell(c, d);
        auto [it, inserted] = cache_.try_emplace(key);
        if (inserted && lambda_ > 0.0) {
            scratch_.clear();
            sample_cell(d, lambda_, seed_, c, scratch_);
            for (const auto& p : scratch_) {
                if (window_.contains(p.position)) {
                    it->second.push_back(p);
                }
            }
        }
        return it->second;
    }

    /// Calls fn(point) for every field point in lattice cells meeting the cube x ± radius.
    template <class Fn>
    void for_each_near(const Point& x, double radius, Fn&& fn)
    {
        const int d = window_.dimension();
        CellCoord lo{};
        CellCoord hi{};
        for (int k = 0; k < d; ++k) {
            lo[k] = std::max(lo_[k], static_cast<std::int64_t>(std::floor(x[k] - radius)));
            hi[k] = std::min(hi_[k], static_cast<std::int64_t>(std::floor(x[k] + radius)));
            if (lo[k] > hi[k]) {
                return;
            }
        }
        CellCoord c = lo;
        for (;;) {
            for (const auto& p : cell(c)) {
                fn(p);
            }
            int k = d - 1;
            while (k >= 0 && c[k] == hi[k]) {
                c[k] = lo[k];
                --k;
            }
            if (k < 0) {
                return;
            }
            ++c[k];
        }
    }

private:
    BoxWindow window_;
    double lambda_;
    std::uint64_t seed_;
    CellCoord lo_{};
    CellCoord hi_{};
    std::unordered_map<std::uint64_t, std::vector<MarkedPoint>> cache_;
    std::vector<MarkedPoint> scratch_;
};

/// Breadth-first exploration of the cluster of forced[0] in the graph on
/// forced ∪ {field points p with keep(p)}.
///
/// visit(p) is called for every member in discovery order (including the start);
/// returning false stops the search. Returns the members found so far.
template <class Keep, class Visit>
std::vector<MarkedPoint> explore_cluster(LazyPoissonField& field, std::span<const MarkedPoint> forced,
                                         const ConnectionSpec& psi, const PairRandomSource& src, Keep&& keep,
                                         Visit&& visit)
{
    std::vector<MarkedPoint> members;
    if (forced.empty()) {
        return members;
    }
    std::unordered_set<std::int64_t> seen;
    members.push_back(forced[0]);
    seen.insert(forced[0].id.value);
    if (!visit(forced[0])) {
        return members;
    }
    const double radius = psi.support_radius();
    bool stop = false;
    for (std::size_t head = 0; head < members.size() && !stop; ++head) {
        const MarkedPoint v = members[head];
        auto consider = [&](const MarkedPoint& w) {
            if (stop || seen.contains(w.id.value) || !connected(v, w, psi, src)) {
                return;
            }
            seen.insert(w.id.value);
            members.push_back(w);
            if (!visit(w)) {
                stop = true;
            }
        };
        for (const auto& f : forced) {
            consider(f);
        }
        if (psi.identically_zero()) {
            continue;
        }
        field.for_each_near(v.position, radius, [&](const MarkedPoint& w) {
            if (keep(w)) {
                consider(w);
            }
        });
    }
    return members;
}

} // namespace rcm
